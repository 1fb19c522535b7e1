#include <doctest.h>

#include "rlab/error.hpp"
#include "rlab/features.hpp"
#include "rlab/trace.hpp"

using namespace rlab;

namespace {

std::size_t parse_error_line(std::string_view text) {
    try {
        parse_trace(text);
    } catch (const ParseError& e) {
        return e.line();
    }
    FAIL("no ParseError for: " << text);
    return 0;
}

TraceLog build(std::initializer_list<std::pair<EventKind, TraceAttrs>> events) {
    TraceLog log;
    log.scenario_id = "hand";
    TraceRecorder rec(log);
    for (const auto& [k, a] : events) rec.record(k, a);
    return log;
}

}  // namespace

TEST_SUITE("trace") {

TEST_CASE("empty log round trips") {
    TraceLog log;
    CHECK(parse_trace(emit_trace(log)) == log);
    CHECK(parse_trace("").events.empty());
}

TEST_CASE("emit format") {
    auto log = build({{EventKind::PROC_EXEC, {{"cmd", "vssadmin delete shadows"}}},
                      {EventKind::NOTE_WRITE, {{"path", "/n.txt"}}}});
    CHECK(emit_trace(log) == "#scenario=hand\n1\tPROC_EXEC\tcmd=vssadmin delete shadows\n2\tNOTE_WRITE\tpath=/n.txt\n");
}

TEST_CASE("escaping round trips awkward values") {
    std::string nasty = "a;b=c%d\te\nf\rg";
    CHECK(unescape_field(escape_field(nasty), 1) == nasty);
    auto log = build({{EventKind::PROC_EXEC, {{"cmd", nasty}}}});
    log.scenario_id = "id;with=stuff";
    auto text = emit_trace(log);
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
    CHECK(parse_trace(text) == log);
}

TEST_CASE("unknown kind is rejected with its line") {
    CHECK(parse_error_line("1\tNOTE_WRITE\tpath=/a\n2\tTELEPORT\tx=1\n") == 2);
}

TEST_CASE("malformed lines") {
    CHECK(parse_error_line("x\tNOTE_WRITE\tpath=/a\n") == 1);
    CHECK(parse_error_line("1\tNOTE_WRITE\n") == 1);
    CHECK(parse_error_line("1\tNOTE_WRITE\tpath=/a\textra\n") == 1);
    CHECK(parse_error_line("1\tNOTE_WRITE\tpath\n") == 1);
    CHECK(parse_error_line("1\tNOTE_WRITE\tpath=/a;path=/b\n") == 1);
    CHECK(parse_error_line("1\tNOTE_WRITE\t=x;path=/a\n") == 1);
    CHECK(parse_error_line("1\tNOTE_WRITE\tpath=%zz\n") == 1);
    CHECK(parse_error_line("1\tNOTE_WRITE\tpath=%4\n") == 1);
    CHECK(parse_error_line("1\tNOTE_WRITE\tpath=/a\r\n") == 1);
    CHECK(parse_error_line("2\tNOTE_WRITE\tpath=/a\n2\tNOTE_WRITE\tpath=/b\n") == 2);
    CHECK(parse_error_line("1\tNOTE_WRITE\tpath=/a\n#scenario=late\n") == 2);
}

TEST_CASE("required attributes are enforced") {
    CHECK(parse_error_line("1\tFILE_WRITE\tblob_id=x\n") == 1);
    CHECK(parse_error_line("1\tFILE_DELETE\tpath=/a;mode=Shred\n") == 1);
    CHECK(parse_error_line("1\tKEYGEN\tkey_id=k;key_kind=quantum;residue=0\n") == 1);
    CHECK(parse_error_line("1\tSHADOW_DELETE\tcount=many\n") == 1);
}

TEST_CASE("comments and blank lines are skipped") {
    auto log = parse_trace("#scenario=s\n\n# a note\n3\tNOTE_WRITE\tpath=/n\n");
    CHECK(log.scenario_id == "s");
    REQUIRE(log.events.size() == 1);
    CHECK(log.events[0].seq == 3);
}

TEST_CASE("recorder numbers events") {
    TraceLog log;
    TraceRecorder rec(log);
    CHECK(rec.record(EventKind::NOTE_WRITE, {{"path", "/a"}}).seq == 1);
    CHECK(rec.record(EventKind::NOTE_WRITE, {{"path", "/b"}}).seq == 2);
    CHECK_THROWS_AS(rec.record(EventKind::FILE_READ, {}), ParseError);
}

}  // TEST_SUITE

TEST_SUITE("features") {

TEST_CASE("note-only trace gives the all-false vector") {
    auto log = build({{EventKind::NOTE_WRITE, {{"path", "/README.txt"}}}});
    CHECK(extract_features(log) == FeatureVector{});
}

TEST_CASE("vssadmin alone gives del_shadow_copies only") {
    auto log = build({{EventKind::PROC_EXEC, {{"cmd", "vssadmin delete shadows"}}}});
    FeatureVector expect;
    expect.del_shadow_copies = true;
    CHECK(extract_features(log) == expect);
    auto upper = build({{EventKind::PROC_EXEC, {{"cmd", "C:\\Windows\\System32\\VSSADMIN.EXE Delete Shadows"}}}});
    CHECK(extract_features(upper) == expect);
    auto other = build({{EventKind::PROC_EXEC, {{"cmd", "notepad.exe"}}}});
    CHECK(extract_features(other) == FeatureVector{});
}

TEST_CASE("hand-written single embedded symmetric key") {
    auto log = build({
        {EventKind::EMBEDDED_KEY_READ, {{"key_id", "k1"}, {"key_kind", "sym"}, {"offset", "256"}}},
        {EventKind::FILE_READ, {{"path", "/a"}}},
        {EventKind::FILE_WRITE,
         {{"path", "/a.locked"}, {"blob_id", "b1"}, {"producer", "PerFileEncryption"}, {"key_id", "k1"}, {"src", "/a"}}},
        {EventKind::FILE_DELETE, {{"path", "/a"}, {"mode", "OverwriteRandom"}}},
        {EventKind::PROC_EXEC, {{"cmd", "vssadmin.exe Delete Shadows /All /Quiet"}}},
        {EventKind::SHADOW_DELETE, {{"count", "1"}}},
    });
    FeatureVector expect;
    expect.sk_pemb = true;
    expect.sk_kind = SkKind::Symmetric;
    expect.del_shadow_copies = true;
    expect.overwrite_delete = true;
    CHECK(extract_features(log) == expect);
}

TEST_CASE("overwriting a file that was never encrypted is not overwrite_delete") {
    auto log = build({{EventKind::FILE_DELETE, {{"path", "/tmp/x"}, {"mode", "OverwriteRandom"}}}});
    CHECK_FALSE(extract_features(log).overwrite_delete);
}

TEST_CASE("hybrid governed by the unwrapped root key") {
    auto log = build({
        {EventKind::NET_FETCH_KEY, {{"key_id", "m"}, {"key_kind", "pub"}}},
        {EventKind::KEYGEN, {{"key_id", "k1"}, {"key_kind", "sym"}, {"residue", "0"}}},
        {EventKind::FILE_WRITE,
         {{"path", "/a"},
          {"blob_id", "b1"},
          {"producer", "PerFileEncryption"},
          {"key_id", "k1"},
          {"wrap_key", "m"},
          {"wrap_blob", "w1"}}},
    });
    auto fv = extract_features(log);
    CHECK(fv.hk_c2);
    CHECK_FALSE(fv.any_single());
    CHECK(fv.sk_kind == SkKind::NotApplicable);
}

TEST_CASE("contradictory traces are rejected") {
    auto kind_of = [](const TraceLog& log) {
        try {
            extract_features(log);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::ConfigError;
    };
    auto two_keys_no_wrap = build({
        {EventKind::KEYGEN, {{"key_id", "k1"}, {"key_kind", "sym"}, {"residue", "0"}}},
        {EventKind::KEYGEN, {{"key_id", "k2"}, {"key_kind", "sym"}, {"residue", "0"}}},
        {EventKind::FILE_WRITE, {{"path", "/a"}, {"blob_id", "b1"}, {"producer", "PerFileEncryption"}, {"key_id", "k1"}}},
        {EventKind::FILE_WRITE, {{"path", "/b"}, {"blob_id", "b2"}, {"producer", "PerFileEncryption"}, {"key_id", "k2"}}},
    });
    CHECK(kind_of(two_keys_no_wrap) == ErrorKind::InconsistentTrace);

    auto unacquired = build({
        {EventKind::FILE_WRITE, {{"path", "/a"}, {"blob_id", "b1"}, {"producer", "PerFileEncryption"}, {"key_id", "k1"}}},
    });
    CHECK(kind_of(unacquired) == ErrorKind::InconsistentTrace);

    auto sym_wrapper = build({
        {EventKind::KEYGEN, {{"key_id", "m"}, {"key_kind", "sym"}, {"residue", "0"}}},
        {EventKind::KEYGEN, {{"key_id", "k1"}, {"key_kind", "sym"}, {"residue", "0"}}},
        {EventKind::FILE_WRITE,
         {{"path", "/a"}, {"blob_id", "b"}, {"producer", "PerFileEncryption"}, {"key_id", "k1"}, {"wrap_key", "m"}, {"wrap_blob", "w"}}},
    });
    CHECK(kind_of(sym_wrapper) == ErrorKind::InconsistentTrace);

    auto cycle = build({
        {EventKind::KEYGEN, {{"key_id", "a"}, {"key_kind", "asym"}, {"residue", "0"}}},
        {EventKind::KEYGEN, {{"key_id", "b"}, {"key_kind", "asym"}, {"residue", "0"}}},
        {EventKind::NET_EXFIL, {{"blob_id", "x"}, {"producer", "KeyWrap"}, {"key_id", "a"}, {"wrapped", "b"}}},
        {EventKind::NET_EXFIL, {{"blob_id", "y"}, {"producer", "KeyWrap"}, {"key_id", "b"}, {"wrapped", "a"}}},
    });
    CHECK(kind_of(cycle) == ErrorKind::InconsistentTrace);
}

TEST_CASE("json round trip and validation") {
    FeatureVector fv;
    fv.sk_c2 = true;
    fv.sk_kind = SkKind::Symmetric;
    fv.overwrite_delete = true;
    nlohmann::json j = fv;
    CHECK(j.get<FeatureVector>() == fv);
    CHECK(nlohmann::json::object().get<FeatureVector>() == FeatureVector{});
    CHECK_THROWS_AS(nlohmann::json({{"hk_c2", 1}}).get<FeatureVector>(), Error);
    CHECK_THROWS_AS(nlohmann::json({{"sk_kind", "Quantum"}}).get<FeatureVector>(), Error);
    CHECK_THROWS_AS(nlohmann::json::array().get<FeatureVector>(), Error);
}

}  // TEST_SUITE
