#include "rlab/trace.hpp"

#include <array>
#include <charconv>
#include <utility>

#include "rlab/error.hpp"

namespace rlab {

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 10> kKindNames{{
    {EventKind::KEYGEN, "KEYGEN"},
    {EventKind::EMBEDDED_KEY_READ, "EMBEDDED_KEY_READ"},
    {EventKind::NET_FETCH_KEY, "NET_FETCH_KEY"},
    {EventKind::FILE_READ, "FILE_READ"},
    {EventKind::FILE_WRITE, "FILE_WRITE"},
    {EventKind::FILE_DELETE, "FILE_DELETE"},
    {EventKind::SHADOW_DELETE, "SHADOW_DELETE"},
    {EventKind::NET_EXFIL, "NET_EXFIL"},
    {EventKind::PROC_EXEC, "PROC_EXEC"},
    {EventKind::NOTE_WRITE, "NOTE_WRITE"},
}};

constexpr std::string_view kHeaderPrefix = "#scenario=";

bool needs_escape(char c) {
    return c == '%' || c == ';' || c == '=' || c == '\t' || c == '\n' || c == '\r';
}

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
}

bool parse_uint(std::string_view s, std::uint64_t& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
    throw ParseError(line, what);
}

void require(const TraceEvent& e, std::size_t line, const char* key) {
    if (!e.has(key))
        fail(line, std::string(to_string(e.kind)) + " requires attribute '" + key + "'");
}

void require_one_of(const TraceEvent& e, std::size_t line, const char* key,
                    std::initializer_list<std::string_view> allowed, bool optional = false) {
    if (!e.has(key)) {
        if (optional) return;
        require(e, line, key);
    }
    const auto& v = e.attr(key);
    for (auto a : allowed)
        if (v == a) return;
    fail(line, "attribute '" + std::string(key) + "' has invalid value '" + v + "'");
}

void require_uint(const TraceEvent& e, std::size_t line, const char* key) {
    require(e, line, key);
    std::uint64_t v;
    if (!parse_uint(e.attr(key), v))
        fail(line, "attribute '" + std::string(key) + "' must be an unsigned integer");
}

}  // namespace

std::string_view to_string(EventKind kind) {
    for (const auto& [k, name] : kKindNames)
        if (k == kind) return name;
    return "UNKNOWN";
}

std::optional<EventKind> event_kind_from_string(std::string_view s) {
    for (const auto& [k, name] : kKindNames)
        if (name == s) return k;
    return std::nullopt;
}

const std::string& TraceEvent::attr(const std::string& key) const {
    static const std::string kEmpty;
    auto it = attrs.find(key);
    return it == attrs.end() ? kEmpty : it->second;
}

void validate_event(const TraceEvent& e, std::size_t line) {
    switch (e.kind) {
    case EventKind::KEYGEN:
        require(e, line, "key_id");
        require_one_of(e, line, "key_kind", {"sym", "asym"});
        require_one_of(e, line, "residue", {"0", "1"});
        break;
    case EventKind::EMBEDDED_KEY_READ:
        require(e, line, "key_id");
        require_one_of(e, line, "key_kind", {"sym", "pub"});
        require_uint(e, line, "offset");
        break;
    case EventKind::NET_FETCH_KEY:
        require(e, line, "key_id");
        require_one_of(e, line, "key_kind", {"sym", "pub"});
        break;
    case EventKind::FILE_READ:
    case EventKind::NOTE_WRITE:
        require(e, line, "path");
        break;
    case EventKind::FILE_WRITE:
        require(e, line, "path");
        require_one_of(e, line, "producer", {"PerFileEncryption", "KeyWrap"}, /*optional=*/true);
        if (e.has("producer")) {
            require(e, line, "blob_id");
            require(e, line, "key_id");
        }
        if (e.has("wrap_key") != e.has("wrap_blob"))
            fail(line, "wrap_key and wrap_blob must appear together");
        break;
    case EventKind::FILE_DELETE:
        require(e, line, "path");
        require_one_of(e, line, "mode", {"MetadataOnly", "OverwriteRandom"});
        break;
    case EventKind::SHADOW_DELETE:
        require_uint(e, line, "count");
        break;
    case EventKind::NET_EXFIL:
        require(e, line, "blob_id");
        require(e, line, "key_id");
        require_one_of(e, line, "producer", {"PerFileEncryption", "KeyWrap"});
        break;
    case EventKind::PROC_EXEC:
        require(e, line, "cmd");
        break;
    }
}

const TraceEvent& TraceRecorder::record(EventKind kind, TraceAttrs attrs) {
    TraceEvent e{next_seq_++, kind, std::move(attrs)};
    validate_event(e);
    log_.events.push_back(std::move(e));
    return log_.events.back();
}

std::string escape_field(std::string_view raw) {
    static constexpr char kHex[] = "0123456789ABCDEF";
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
        if (needs_escape(c)) {
            auto u = static_cast<unsigned char>(c);
            out.push_back('%');
            out.push_back(kHex[u >> 4]);
            out.push_back(kHex[u & 0x0f]);
        } else {
            out.push_back(c);
        }
    }
    return out;
}

std::string unescape_field(std::string_view escaped, std::size_t line) {
    std::string out;
    out.reserve(escaped.size());
    for (std::size_t i = 0; i < escaped.size(); ++i) {
        char c = escaped[i];
        if (c != '%') {
            out.push_back(c);
            continue;
        }
        if (i + 2 >= escaped.size())
            fail(line, "truncated percent escape");
        int hi = hex_digit(escaped[i + 1]);
        int lo = hex_digit(escaped[i + 2]);
        if (hi < 0 || lo < 0) fail(line, "invalid percent escape");
        out.push_back(static_cast<char>(hi << 4 | lo));
        i += 2;
    }
    return out;
}

std::string emit_trace(const TraceLog& log) {
    std::string out;
    out += kHeaderPrefix;
    out += escape_field(log.scenario_id);
    out += '\n';
    for (const auto& e : log.events) {
        out += std::to_string(e.seq);
        out += '\t';
        out += to_string(e.kind);
        out += '\t';
        bool first = true;
        for (const auto& [k, v] : e.attrs) {
            if (!first) out += ';';
            first = false;
            out += escape_field(k);
            out += '=';
            out += escape_field(v);
        }
        out += '\n';
    }
    return out;
}

TraceLog parse_trace(std::string_view text) {
    TraceLog log;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool have_prev = false;
    std::uint64_t prev_seq = 0;
    while (pos < text.size()) {
        auto eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') fail(line_no, "carriage return in line");
        if (line.empty()) continue;
        if (line.front() == '#') {
            if (line.substr(0, kHeaderPrefix.size()) == kHeaderPrefix) {
                if (line_no != 1) fail(line_no, "scenario header must be the first line");
                log.scenario_id = unescape_field(line.substr(kHeaderPrefix.size()), line_no);
            }
            continue;
        }

        auto tab1 = line.find('\t');
        auto tab2 = tab1 == std::string_view::npos ? tab1 : line.find('\t', tab1 + 1);
        if (tab2 == std::string_view::npos || line.find('\t', tab2 + 1) != std::string_view::npos)
            fail(line_no, "expected exactly 3 tab-separated fields");

        TraceEvent e;
        if (!parse_uint(line.substr(0, tab1), e.seq)) fail(line_no, "sequence number is not an unsigned integer");
        if (have_prev && e.seq <= prev_seq) fail(line_no, "sequence numbers must strictly increase");
        auto kind = event_kind_from_string(line.substr(tab1 + 1, tab2 - tab1 - 1));
        if (!kind) fail(line_no, "unknown event kind '" + std::string(line.substr(tab1 + 1, tab2 - tab1 - 1)) + "'");
        e.kind = *kind;

        std::string_view attrs = line.substr(tab2 + 1);
        std::size_t apos = 0;
        while (!attrs.empty() && apos <= attrs.size()) {
            auto semi = attrs.find(';', apos);
            auto item = attrs.substr(apos, semi == std::string_view::npos ? std::string_view::npos : semi - apos);
            auto eq = item.find('=');
            if (eq == std::string_view::npos) fail(line_no, "attribute without '='");
            auto key = unescape_field(item.substr(0, eq), line_no);
            if (key.empty()) fail(line_no, "empty attribute key");
            if (!e.attrs.emplace(std::move(key), unescape_field(item.substr(eq + 1), line_no)).second)
                fail(line_no, "duplicate attribute key");
            if (semi == std::string_view::npos) break;
            apos = semi + 1;
        }
        validate_event(e, line_no);
        prev_seq = e.seq;
        have_prev = true;
        log.events.push_back(std::move(e));
    }
    return log;
}

}  // namespace rlab
