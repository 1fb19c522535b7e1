#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rlab {

enum class EventKind {
    KEYGEN,
    EMBEDDED_KEY_READ,
    NET_FETCH_KEY,
    FILE_READ,
    FILE_WRITE,
    FILE_DELETE,
    SHADOW_DELETE,
    NET_EXFIL,
    PROC_EXEC,
    NOTE_WRITE,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> event_kind_from_string(std::string_view s);

using TraceAttrs = std::map<std::string, std::string>;

/// Attribute keys used by the simulator and understood by the extractor.
///
///   KEYGEN             key_id key_kind=sym|asym residue=0|1
///   EMBEDDED_KEY_READ  key_id key_kind=sym|pub offset
///   NET_FETCH_KEY      key_id key_kind=sym|pub
///   FILE_READ          path
///   FILE_WRITE         path [blob_id producer key_id src wrap_key wrap_blob wrapped]
///   FILE_DELETE        path mode=MetadataOnly|OverwriteRandom
///   SHADOW_DELETE      count
///   NET_EXFIL          blob_id producer key_id [wrapped]
///   PROC_EXEC          cmd
///   NOTE_WRITE         path
struct TraceEvent {
    std::uint64_t seq = 0;
    EventKind kind = EventKind::NOTE_WRITE;
    TraceAttrs attrs;

    bool operator==(const TraceEvent&) const = default;

    /// Empty string when absent.
    const std::string& attr(const std::string& key) const;
    bool has(const std::string& key) const { return attrs.count(key) != 0; }
};

struct TraceLog {
    std::string scenario_id;
    std::vector<TraceEvent> events;

    bool operator==(const TraceLog&) const = default;
};

/// Throws ParseError (line 0) if an event misses a required attribute or
/// carries an out-of-range enumerated value.
void validate_event(const TraceEvent& event, std::size_t line = 0);

/// Appends events with strictly increasing sequence numbers.
class TraceRecorder {
public:
    explicit TraceRecorder(TraceLog& log) : log_(log) {}

    const TraceEvent& record(EventKind kind, TraceAttrs attrs);
    const TraceLog& log() const noexcept { return log_; }

private:
    TraceLog& log_;
    std::uint64_t next_seq_ = 1;
};

/// Line format, one event per line:
///   #scenario=<id>
///   <seq>\t<KIND>\t<k>=<v>;<k>=<v>
/// Keys are emitted in sorted order. '%', ';', '=', tab, CR and LF inside
/// keys and values are percent-escaped.
std::string emit_trace(const TraceLog& log);
/// Throws ParseError carrying the offending line number.
TraceLog parse_trace(std::string_view text);

std::string escape_field(std::string_view raw);
std::string unescape_field(std::string_view escaped, std::size_t line);

}  // namespace rlab
