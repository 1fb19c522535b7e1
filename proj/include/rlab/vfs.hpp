#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rlab/bytes.hpp"
#include "rlab/rng.hpp"
#include "rlab/trace.hpp"

namespace rlab {

enum class FileState { Live, MetadataDeleted, Overwritten };
enum class DeleteMode { MetadataOnly, OverwriteRandom };

std::string_view to_string(FileState s);
FileState file_state_from_string(std::string_view s);
std::string_view to_string(DeleteMode m);
DeleteMode delete_mode_from_string(std::string_view s);

/// Logical timestamps come from the filesystem's own monotone clock.
struct FileMetadata {
    std::uint64_t size = 0;
    std::uint64_t created = 0;
    std::uint64_t modified = 0;
    std::uint64_t deleted = 0;  // 0 while Live

    bool operator==(const FileMetadata&) const = default;
};

/// A MetadataDeleted entry still holds its original bytes; an Overwritten
/// entry holds only random octets of the same length.
struct FileEntry {
    std::string path;
    Bytes content;
    FileMetadata meta;
    FileState state = FileState::Live;

    bool operator==(const FileEntry&) const = default;
};

struct ShadowSnapshot {
    std::uint64_t snapshot_id = 0;
    std::uint64_t taken_at = 0;
    std::map<std::string, Bytes> files;

    bool operator==(const ShadowSnapshot&) const = default;
};

/// Canonical form: leading '/', single separators, no trailing '/', no '.'
/// or '..' components. Throws ConfigError otherwise.
std::string normalize_path(std::string_view path);

/// Supported syntax: '*' (within one component), '**' (any depth), '?'
/// and literal characters. Anything else ('[', ']', '{', '}', '\\')
/// throws ConfigError.
void validate_glob(std::string_view pattern);
bool glob_match(std::string_view pattern, std::string_view path);

class VirtualFS {
public:
    VirtualFS() = default;

    /// Throws ConfigError on duplicate or malformed paths.
    static VirtualFS create(const std::vector<std::pair<std::string, Bytes>>& files);

    /// File-level operations record trace events while a recorder is attached.
    void attach_trace(TraceRecorder* recorder) noexcept { trace_ = recorder; }

    /// Creates or replaces a Live entry. Any deleted entry at the path is discarded.
    void write_file(std::string_view path, Bytes content, TraceAttrs extra = {},
                    EventKind kind = EventKind::FILE_WRITE);
    /// Live entries only; NotFound otherwise. Records FILE_READ.
    Bytes read_file(std::string_view path);
    /// Untraced read of a Live entry.
    const Bytes& peek(std::string_view path) const;

    void delete_file(std::string_view path, DeleteMode mode, Rng& rng);
    Bytes undelete(std::string_view path);
    /// Undeletes every MetadataDeleted entry; Overwritten ones are skipped.
    std::map<std::string, Bytes> undelete_all();

    std::uint64_t take_shadow_snapshot();
    std::size_t delete_shadow_copies();
    std::size_t restore_from_shadow(std::uint64_t snapshot_id);
    const ShadowSnapshot& snapshot(std::uint64_t snapshot_id) const;

    bool contains(std::string_view path) const;
    const FileEntry& entry(std::string_view path) const;
    std::vector<std::string> live_paths() const;

    const std::map<std::string, FileEntry>& entries() const noexcept { return entries_; }
    const std::vector<ShadowSnapshot>& snapshots() const noexcept { return snapshots_; }
    std::uint64_t clock() const noexcept { return clock_; }
    std::uint64_t next_snapshot_id() const noexcept { return next_snapshot_id_; }

    /// Raw reconstruction used by the image loader.
    void restore_state(std::map<std::string, FileEntry> entries, std::vector<ShadowSnapshot> snapshots,
                       std::uint64_t clock, std::uint64_t next_snapshot_id);

    bool operator==(const VirtualFS& other) const {
        return entries_ == other.entries_ && snapshots_ == other.snapshots_ && clock_ == other.clock_ &&
               next_snapshot_id_ == other.next_snapshot_id_;
    }

private:
    FileEntry& find(const std::string& path);
    std::uint64_t tick() noexcept { return ++clock_; }

    std::map<std::string, FileEntry> entries_;
    std::vector<ShadowSnapshot> snapshots_;
    std::uint64_t clock_ = 0;
    std::uint64_t next_snapshot_id_ = 1;
    TraceRecorder* trace_ = nullptr;
};

}  // namespace rlab
