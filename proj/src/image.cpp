#include "rlab/image.hpp"

#include <fstream>
#include <iterator>

#include "rlab/error.hpp"

namespace rlab {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void image_error(const std::string& what) {
    throw Error(ErrorKind::ImageError, what);
}

fs::path under(const fs::path& root, const std::string& vpath) {
    // vpath is normalized and absolute, so dropping the leading '/' keeps it inside root.
    return root / fs::path(vpath.substr(1));
}

nlohmann::json read_json(const fs::path& file) {
    try {
        return nlohmann::json::parse(read_text_file(file));
    } catch (const nlohmann::json::exception& e) {
        image_error(file.string() + ": " + e.what());
    }
}

nlohmann::json blob_to_json(const CipherBlob& b) { return to_hex(encode_blob(b)); }

CipherBlob blob_from_json(const nlohmann::json& j) {
    try {
        return decode_blob(from_hex(j.get<std::string>()));
    } catch (const Error& e) {
        image_error(std::string("bad cipher blob: ") + e.what());
    }
}

}  // namespace

std::string read_text_file(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) image_error("cannot read " + file.string());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_text_file(const fs::path& file, std::string_view text) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) image_error("cannot write " + file.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) image_error("short write to " + file.string());
}

Bytes read_binary_file(const fs::path& file) { return to_bytes(read_text_file(file)); }

void write_binary_file(const fs::path& file, ByteView bytes) {
    write_text_file(file, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

void save_fs_image(const fs::path& dir, const VirtualFS& vfs) {
    std::error_code ec;
    fs::remove_all(dir / "tree", ec);
    fs::remove_all(dir / "snapshots", ec);
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& [path, e] : vfs.entries()) {
        entries.push_back({{"path", path},
                           {"state", std::string(to_string(e.state))},
                           {"size", e.meta.size},
                           {"created", e.meta.created},
                           {"modified", e.meta.modified},
                           {"deleted", e.meta.deleted}});
        write_binary_file(under(dir / "tree", path), e.content);
    }
    nlohmann::json snaps = nlohmann::json::array();
    for (const auto& s : vfs.snapshots()) {
        nlohmann::json files = nlohmann::json::array();
        for (const auto& [path, content] : s.files) {
            files.push_back(path);
            write_binary_file(under(dir / "snapshots" / std::to_string(s.snapshot_id), path), content);
        }
        snaps.push_back({{"snapshot_id", s.snapshot_id}, {"taken_at", s.taken_at}, {"files", files}});
    }
    nlohmann::json index{
        {"schema", "v1"},
        {"clock", vfs.clock()},
        {"next_snapshot_id", vfs.next_snapshot_id()},
        {"entries", entries},
        {"snapshots", snaps},
    };
    write_text_file(dir / "index.json", index.dump(2) + "\n");
}

VirtualFS load_fs_image(const fs::path& dir) {
    auto index = read_json(dir / "index.json");
    try {
        if (index.value("schema", "") != "v1") image_error("image index has no v1 schema tag");
        std::map<std::string, FileEntry> entries;
        for (const auto& j : index.at("entries")) {
            FileEntry e;
            e.path = j.at("path").get<std::string>();
            if (normalize_path(e.path) != e.path) image_error("non-canonical path '" + e.path + "' in image");
            e.state = file_state_from_string(j.at("state").get<std::string>());
            e.meta.size = j.at("size").get<std::uint64_t>();
            e.meta.created = j.at("created").get<std::uint64_t>();
            e.meta.modified = j.at("modified").get<std::uint64_t>();
            e.meta.deleted = j.at("deleted").get<std::uint64_t>();
            e.content = read_binary_file(under(dir / "tree", e.path));
            if (e.content.size() != e.meta.size) image_error("size mismatch for '" + e.path + "'");
            if (!entries.emplace(e.path, e).second) image_error("duplicate path '" + e.path + "' in image");
        }
        std::vector<ShadowSnapshot> snaps;
        for (const auto& j : index.at("snapshots")) {
            ShadowSnapshot s;
            s.snapshot_id = j.at("snapshot_id").get<std::uint64_t>();
            s.taken_at = j.at("taken_at").get<std::uint64_t>();
            for (const auto& p : j.at("files")) {
                auto path = p.get<std::string>();
                if (normalize_path(path) != path) image_error("non-canonical snapshot path '" + path + "'");
                s.files.emplace(path, read_binary_file(under(dir / "snapshots" / std::to_string(s.snapshot_id), path)));
            }
            snaps.push_back(std::move(s));
        }
        VirtualFS out;
        out.restore_state(std::move(entries), std::move(snaps), index.at("clock").get<std::uint64_t>(),
                          index.at("next_snapshot_id").get<std::uint64_t>());
        return out;
    } catch (const nlohmann::json::exception& e) {
        image_error(std::string("malformed image index: ") + e.what());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::ImageError) throw;
        image_error(e.what());
    }
}

nlohmann::json keys_to_json(const std::vector<KeyMaterial>& keys) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& k : keys) out.push_back({{"key_id", key_id_of(k)}, {"key", to_hex(serialize_key(k))}});
    return out;
}

std::vector<KeyMaterial> keys_from_json(const nlohmann::json& j) {
    std::vector<KeyMaterial> out;
    try {
        for (const auto& item : j) out.push_back(deserialize_key(from_hex(item.at("key").get<std::string>())));
    } catch (const nlohmann::json::exception& e) {
        image_error(std::string("malformed key list: ") + e.what());
    } catch (const Error& e) {
        image_error(std::string("bad key in key list: ") + e.what());
    }
    return out;
}

void save_bundle(const fs::path& dir, const SimulationBundle& b) {
    fs::create_directories(dir);
    write_text_file(dir / "scenario.json", nlohmann::json(b.scenario).dump(2) + "\n");
    write_text_file(dir / "trace.trace", emit_trace(b.trace));
    save_fs_image(dir / "image", b.fs);

    nlohmann::json oracle = nlohmann::json::object();
    for (const auto& [path, bytes] : b.oracle) oracle[path] = to_hex(bytes);
    write_text_file(dir / "oracle.json", oracle.dump(2) + "\n");

    nlohmann::json keys{{"schema", "v1"}, {"keys", keys_to_json(b.attacker_keys)}};
    write_text_file(dir / "attacker_keys.json", keys.dump(2) + "\n");

    const auto& a = b.artifacts;
    write_binary_file(dir / "artifacts" / "payload.bin", a.payload_image);
    nlohmann::json idx = nlohmann::json::array();
    for (const auto& r : a.payload_index)
        idx.push_back({{"offset", r.offset}, {"length", r.length}, {"key_id", r.key_id}, {"kind", r.kind}});
    write_text_file(dir / "artifacts" / "payload.idx.json", idx.dump(2) + "\n");
    write_text_file(dir / "artifacts" / "ransom_note.txt", a.ransom_note);

    nlohmann::json exfil = nlohmann::json::array();
    for (const auto& blob : a.exfiltrated_blobs) exfil.push_back(blob_to_json(blob));
    nlohmann::json cmap = nlohmann::json::object();
    for (const auto& [path, blob] : a.ciphertext_map) cmap[path] = blob_to_json(blob);
    nlohmann::json art{
        {"schema", "v1"},
        {"note_path", a.note_path},
        {"exfiltrated_blobs", exfil},
        {"victim_residue", keys_to_json(a.victim_residue)},
        {"ciphertext_map", cmap},
    };
    write_text_file(dir / "artifacts" / "artifacts.json", art.dump(2) + "\n");
}

RecoveryImage load_recovery_image(const fs::path& dir) {
    if (!fs::is_directory(dir)) image_error("image directory '" + dir.string() + "' does not exist");
    RecoveryImage img;
    img.fs = load_fs_image(dir / "image");
    auto& a = img.artifacts;
    a.payload_image = read_binary_file(dir / "artifacts" / "payload.bin");
    a.ransom_note = read_text_file(dir / "artifacts" / "ransom_note.txt");
    try {
        for (const auto& r : read_json(dir / "artifacts" / "payload.idx.json"))
            a.payload_index.push_back({r.at("offset").get<std::size_t>(), r.at("length").get<std::size_t>(),
                                       r.at("key_id").get<std::string>(), r.at("kind").get<std::string>()});
        auto art = read_json(dir / "artifacts" / "artifacts.json");
        a.note_path = art.at("note_path").get<std::string>();
        for (const auto& blob : art.at("exfiltrated_blobs")) a.exfiltrated_blobs.push_back(blob_from_json(blob));
        a.victim_residue = keys_from_json(art.at("victim_residue"));
        for (const auto& [path, blob] : art.at("ciphertext_map").items())
            a.ciphertext_map.emplace(path, blob_from_json(blob));
        auto oracle = read_json(dir / "oracle.json");
        for (const auto& [path, hex] : oracle.items())
            img.oracle.emplace(path, from_hex(hex.get<std::string>()));
    } catch (const nlohmann::json::exception& e) {
        image_error(std::string("malformed artifacts: ") + e.what());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::ImageError) throw;
        image_error(e.what());
    }
    return img;
}

Keyring load_attacker_keys(const fs::path& file) {
    auto doc = read_json(file);
    Keyring ring;
    const auto& list = doc.is_object() && doc.contains("keys") ? doc.at("keys") : doc;
    for (const auto& k : keys_from_json(list)) ring.add(k);
    return ring;
}

}  // namespace rlab
