#include "rlab/vfs.hpp"

#include <set>

#include "rlab/error.hpp"

namespace rlab {

namespace {

bool glob_match_impl(std::string_view p, std::string_view s) {
    while (!p.empty()) {
        if (p.substr(0, 2) == "**") {
            std::string_view rest = p.substr(2);
            while (!rest.empty() && rest.front() == '*') rest.remove_prefix(1);
            // "**/" may also match zero directories.
            if (!rest.empty() && rest.front() == '/' && glob_match_impl(rest.substr(1), s)) return true;
            for (std::size_t i = 0; i <= s.size(); ++i)
                if (glob_match_impl(rest, s.substr(i))) return true;
            return false;
        }
        if (p.front() == '*') {
            std::string_view rest = p.substr(1);
            for (std::size_t i = 0; i <= s.size(); ++i) {
                if (glob_match_impl(rest, s.substr(i))) return true;
                if (i < s.size() && s[i] == '/') break;
            }
            return false;
        }
        if (s.empty()) return false;
        if (p.front() == '?') {
            if (s.front() == '/') return false;
        } else if (p.front() != s.front()) {
            return false;
        }
        p.remove_prefix(1);
        s.remove_prefix(1);
    }
    return s.empty();
}

}  // namespace

std::string_view to_string(FileState s) {
    switch (s) {
    case FileState::Live: return "Live";
    case FileState::MetadataDeleted: return "MetadataDeleted";
    case FileState::Overwritten: return "Overwritten";
    }
    return "Live";
}

FileState file_state_from_string(std::string_view s) {
    if (s == "Live") return FileState::Live;
    if (s == "MetadataDeleted") return FileState::MetadataDeleted;
    if (s == "Overwritten") return FileState::Overwritten;
    throw Error(ErrorKind::ImageError, "unknown file state '" + std::string(s) + "'");
}

std::string_view to_string(DeleteMode m) {
    return m == DeleteMode::MetadataOnly ? "MetadataOnly" : "OverwriteRandom";
}

DeleteMode delete_mode_from_string(std::string_view s) {
    if (s == "MetadataOnly") return DeleteMode::MetadataOnly;
    if (s == "OverwriteRandom") return DeleteMode::OverwriteRandom;
    throw Error(ErrorKind::ConfigError, "unknown delete mode '" + std::string(s) + "'");
}

std::string normalize_path(std::string_view path) {
    if (path.empty() || path.front() != '/')
        throw Error(ErrorKind::ConfigError, "path must be absolute: '" + std::string(path) + "'");
    std::string out;
    std::size_t pos = 0;
    while (pos < path.size()) {
        auto next = path.find('/', pos);
        auto comp = path.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
        pos = next == std::string_view::npos ? path.size() : next + 1;
        if (comp.empty()) continue;
        if (comp == "." || comp == "..")
            throw Error(ErrorKind::ConfigError, "relative component in path '" + std::string(path) + "'");
        for (char c : comp)
            if (static_cast<unsigned char>(c) < 0x20)
                throw Error(ErrorKind::ConfigError, "control character in path");
        out += '/';
        out += comp;
    }
    if (out.empty()) throw Error(ErrorKind::ConfigError, "path names the root directory");
    return out;
}

void validate_glob(std::string_view pattern) {
    if (pattern.empty()) throw Error(ErrorKind::ConfigError, "empty glob");
    for (char c : pattern) {
        if (c == '[' || c == ']' || c == '{' || c == '}' || c == '\\')
            throw Error(ErrorKind::ConfigError,
                        "unsupported glob syntax '" + std::string(1, c) + "' in '" + std::string(pattern) + "'");
    }
}

bool glob_match(std::string_view pattern, std::string_view path) {
    validate_glob(pattern);
    return glob_match_impl(pattern, path);
}

VirtualFS VirtualFS::create(const std::vector<std::pair<std::string, Bytes>>& files) {
    VirtualFS fs;
    for (const auto& [raw, content] : files) {
        auto path = normalize_path(raw);
        if (fs.entries_.count(path) != 0) throw Error(ErrorKind::ConfigError, "duplicate path '" + path + "'");
        fs.write_file(path, content);
    }
    return fs;
}

FileEntry& VirtualFS::find(const std::string& path) {
    auto it = entries_.find(path);
    if (it == entries_.end()) throw Error(ErrorKind::NotFound, "no such file '" + path + "'");
    return it->second;
}

void VirtualFS::write_file(std::string_view raw, Bytes content, TraceAttrs extra, EventKind kind) {
    auto path = normalize_path(raw);
    auto now = tick();
    auto it = entries_.find(path);
    if (it != entries_.end() && it->second.state == FileState::Live) {
        it->second.content = std::move(content);
        it->second.meta.size = it->second.content.size();
        it->second.meta.modified = now;
    } else {
        FileEntry e;
        e.path = path;
        e.content = std::move(content);
        e.meta = FileMetadata{e.content.size(), now, now, 0};
        entries_.insert_or_assign(path, std::move(e));
    }
    if (trace_ != nullptr) {
        extra["path"] = path;
        trace_->record(kind, std::move(extra));
    }
}

Bytes VirtualFS::read_file(std::string_view raw) {
    auto path = normalize_path(raw);
    Bytes out = peek(path);
    if (trace_ != nullptr) trace_->record(EventKind::FILE_READ, {{"path", path}});
    return out;
}

const Bytes& VirtualFS::peek(std::string_view raw) const {
    const auto& e = entry(raw);
    if (e.state != FileState::Live) throw Error(ErrorKind::NotFound, "file '" + e.path + "' is deleted");
    return e.content;
}

void VirtualFS::delete_file(std::string_view raw, DeleteMode mode, Rng& rng) {
    auto path = normalize_path(raw);
    auto& e = find(path);
    if (e.state != FileState::Live) throw Error(ErrorKind::AlreadyDeleted, "file '" + path + "' already deleted");
    if (mode == DeleteMode::OverwriteRandom) {
        e.content = rng.bytes(e.content.size());
        e.state = FileState::Overwritten;
    } else {
        e.state = FileState::MetadataDeleted;
    }
    e.meta.deleted = tick();
    if (trace_ != nullptr)
        trace_->record(EventKind::FILE_DELETE, {{"path", path}, {"mode", std::string(to_string(mode))}});
}

Bytes VirtualFS::undelete(std::string_view raw) {
    auto path = normalize_path(raw);
    auto& e = find(path);
    switch (e.state) {
    case FileState::Live:
        throw Error(ErrorKind::NotDeleted, "file '" + path + "' is live");
    case FileState::Overwritten:
        throw Error(ErrorKind::UnrecoverableContent, "file '" + path + "' was overwritten before deletion");
    case FileState::MetadataDeleted:
        break;
    }
    e.state = FileState::Live;
    e.meta.deleted = 0;
    e.meta.modified = tick();
    return e.content;
}

std::map<std::string, Bytes> VirtualFS::undelete_all() {
    std::map<std::string, Bytes> out;
    for (auto& [path, e] : entries_)
        if (e.state == FileState::MetadataDeleted) out.emplace(path, undelete(path));
    return out;
}

std::uint64_t VirtualFS::take_shadow_snapshot() {
    ShadowSnapshot snap;
    snap.snapshot_id = next_snapshot_id_++;
    snap.taken_at = tick();
    for (const auto& [path, e] : entries_)
        if (e.state == FileState::Live) snap.files.emplace(path, e.content);
    snapshots_.push_back(std::move(snap));
    return snapshots_.back().snapshot_id;
}

std::size_t VirtualFS::delete_shadow_copies() {
    std::size_t n = snapshots_.size();
    snapshots_.clear();
    tick();
    if (trace_ != nullptr) trace_->record(EventKind::SHADOW_DELETE, {{"count", std::to_string(n)}});
    return n;
}

const ShadowSnapshot& VirtualFS::snapshot(std::uint64_t snapshot_id) const {
    for (const auto& s : snapshots_)
        if (s.snapshot_id == snapshot_id) return s;
    throw Error(ErrorKind::NoSnapshot, "no shadow snapshot " + std::to_string(snapshot_id));
}

std::size_t VirtualFS::restore_from_shadow(std::uint64_t snapshot_id) {
    auto files = snapshot(snapshot_id).files;
    for (auto& [path, content] : files) write_file(path, std::move(content));
    return files.size();
}

bool VirtualFS::contains(std::string_view raw) const {
    return entries_.count(normalize_path(raw)) != 0;
}

const FileEntry& VirtualFS::entry(std::string_view raw) const {
    auto path = normalize_path(raw);
    auto it = entries_.find(path);
    if (it == entries_.end()) throw Error(ErrorKind::NotFound, "no such file '" + path + "'");
    return it->second;
}

std::vector<std::string> VirtualFS::live_paths() const {
    std::vector<std::string> out;
    for (const auto& [path, e] : entries_)
        if (e.state == FileState::Live) out.push_back(path);
    return out;
}

void VirtualFS::restore_state(std::map<std::string, FileEntry> entries, std::vector<ShadowSnapshot> snapshots,
                              std::uint64_t clock, std::uint64_t next_snapshot_id) {
    std::set<std::uint64_t> ids;
    for (const auto& s : snapshots)
        if (!ids.insert(s.snapshot_id).second || s.snapshot_id >= next_snapshot_id)
            throw Error(ErrorKind::ImageError, "inconsistent snapshot ids");
    entries_ = std::move(entries);
    snapshots_ = std::move(snapshots);
    clock_ = clock;
    next_snapshot_id_ = next_snapshot_id;
}

}  // namespace rlab
