#include "ctikit/serialize.hpp"

#include <zlib.h>

#include <algorithm>
#include <sstream>

#include "ctikit/error.hpp"
#include "ctikit/text.hpp"

namespace ctikit {

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error(ErrorCode::Parse, what); }

const Json& field(const Json& j, const char* key) {
    if (!j.is_object()) fail("record is not a JSON object");
    auto it = j.find(key);
    if (it == j.end()) fail(std::string("missing field '") + key + "'");
    return *it;
}

std::string req_string(const Json& j, const char* key) {
    const Json& v = field(j, key);
    if (v.is_string()) return text::nfc(v.get<std::string>());
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    fail(std::string("field '") + key + "' is not a string");
}

std::string opt_string(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return {};
    if (!it->is_string()) fail(std::string("field '") + key + "' is not a string");
    return text::nfc(it->get<std::string>());
}

bool opt_bool(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return false;
    if (!it->is_boolean()) fail(std::string("field '") + key + "' is not a boolean");
    return it->get<bool>();
}

std::int64_t opt_count(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return 0;
    if (!it->is_number_integer()) fail(std::string("field '") + key + "' is not an integer");
    auto v = it->get<std::int64_t>();
    if (v < 0) fail(std::string("field '") + key + "' is negative");
    return v;
}

std::vector<std::string> opt_strings(const Json& j, const char* key) {
    std::vector<std::string> out;
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return out;
    if (!it->is_array()) fail(std::string("field '") + key + "' is not an array");
    for (const auto& e : *it) {
        if (!e.is_string()) fail(std::string("field '") + key + "' holds a non-string");
        out.push_back(text::nfc(e.get<std::string>()));
    }
    return out;
}

Timestamp req_time(const Json& j, const char* key) {
    const Json& v = field(j, key);
    if (v.is_number_integer()) return Timestamp(v.get<std::int64_t>());
    if (!v.is_string()) fail(std::string("field '") + key + "' is not a timestamp");
    auto ts = parse_timestamp(v.get<std::string>());
    if (!ts) fail(std::string("field '") + key + "' is not a parseable timestamp");
    return *ts;
}

template <class Fn>
auto wrap(Fn&& fn) {
    try {
        return fn();
    } catch (const Json::exception& e) {
        fail(e.what());
    }
}

}  // namespace

void to_json(Json& j, const PostRecord& p) {
    j = Json::object();
    j["post_id"] = p.post_id;
    j["author_id"] = p.author_id;
    j["text"] = text::nfc(p.text);
    j["created_at"] = p.created_at.iso8601();
    j["lang"] = p.lang;
    j["is_retweet"] = p.is_retweet;
    j["source_label"] = p.source_label;
    j["hashtags"] = canonical_set(p.hashtags);
    j["mentions"] = canonical_set(p.mentions);
    j["urls"] = p.urls;
    j["like_count"] = p.like_count;
    j["quote_count"] = p.quote_count;
    j["reply_count"] = p.reply_count;
    j["retweet_count"] = p.retweet_count;
}

void from_json(const Json& j, PostRecord& p) {
    wrap([&] {
        p.post_id = req_string(j, "post_id");
        if (p.post_id.empty()) fail("empty post_id");
        p.author_id = req_string(j, "author_id");
        p.text = req_string(j, "text");
        p.created_at = req_time(j, "created_at");
        p.lang = opt_string(j, "lang");
        p.is_retweet = opt_bool(j, "is_retweet");
        p.source_label = opt_string(j, "source_label");
        p.hashtags = opt_strings(j, "hashtags");
        p.mentions = opt_strings(j, "mentions");
        p.urls = opt_strings(j, "urls");
        p.like_count = opt_count(j, "like_count");
        p.quote_count = opt_count(j, "quote_count");
        p.reply_count = opt_count(j, "reply_count");
        p.retweet_count = opt_count(j, "retweet_count");
        return 0;
    });
}

void to_json(Json& j, const AccountProfile& a) {
    j = Json::object();
    j["author_id"] = a.author_id;
    j["followers_count"] = a.followers_count;
    j["following_count"] = a.following_count;
    j["listed_count"] = a.listed_count;
    j["description"] = text::nfc(a.description);
    j["has_profile_image"] = a.has_profile_image;
    j["protected"] = a.is_protected;
    j["verified"] = a.verified;
    j["created_at"] = a.created_at.iso8601();
    j["snapshot_at"] = a.snapshot_at.iso8601();
}

void from_json(const Json& j, AccountProfile& a) {
    wrap([&] {
        a.author_id = req_string(j, "author_id");
        a.followers_count = opt_count(j, "followers_count");
        a.following_count = opt_count(j, "following_count");
        a.listed_count = opt_count(j, "listed_count");
        a.description = opt_string(j, "description");
        a.has_profile_image = opt_bool(j, "has_profile_image");
        a.is_protected = opt_bool(j, "protected");
        a.verified = opt_bool(j, "verified");
        a.created_at = req_time(j, "created_at");
        a.snapshot_at = req_time(j, "snapshot_at");
        if (a.snapshot_at < a.created_at) fail("snapshot_at precedes created_at");
        return 0;
    });
}

void to_json(Json& j, const IocRecord& r) {
    j = Json::object();
    j["user_name"] = r.user_name;
    j["published_date"] = r.published_date.iso8601();
    j["ioc_value"] = r.ioc_value;
    j["ioc_type"] = std::string(r.ioc_type.name());
    j["hashtags"] = canonical_set(r.hashtags);
    j["tweet_url"] = r.tweet_url;
    j["was_defanged"] = r.was_defanged;
}

void from_json(const Json& j, IocRecord& r) {
    wrap([&] {
        r.user_name = req_string(j, "user_name");
        r.published_date = req_time(j, "published_date");
        r.ioc_value = req_string(j, "ioc_value");
        auto type = IocType::from_name(req_string(j, "ioc_type"));
        if (!type) fail("unknown ioc_type");
        r.ioc_type = *type;
        r.hashtags = canonical_set(opt_strings(j, "hashtags"));
        r.tweet_url = opt_string(j, "tweet_url");
        r.was_defanged = opt_bool(j, "was_defanged");
        return 0;
    });
}

void to_json(Json& j, const Verdict& v) {
    j = Json::object();
    j["ioc_value"] = v.ioc_value;
    j["ioc_type"] = std::string(v.ioc_type.name());
    j["service"] = std::string(short_name(v.service));
    j["status"] = std::string(to_string(v.status));
    j["first_seen"] = v.first_seen ? Json(v.first_seen->iso8601()) : Json(nullptr);
    j["detail"] = v.detail;
}

void from_json(const Json& j, Verdict& v) {
    wrap([&] {
        v.ioc_value = req_string(j, "ioc_value");
        auto type = IocType::from_name(req_string(j, "ioc_type"));
        if (!type) fail("unknown ioc_type");
        v.ioc_type = *type;
        auto service = service_from_name(req_string(j, "service"));
        if (!service) fail("unknown service");
        v.service = *service;
        auto status = verdict_status_from_string(req_string(j, "status"));
        if (!status) fail("unknown verdict status");
        v.status = *status;
        auto it = j.find("first_seen");
        if (it != j.end() && !it->is_null())
            v.first_seen = req_time(j, "first_seen");
        else
            v.first_seen.reset();
        v.detail = opt_string(j, "detail");
        return 0;
    });
}

PostRecord canonical(PostRecord p) {
    p.text = text::nfc(p.text);
    p.hashtags = canonical_set(std::move(p.hashtags));
    p.mentions = canonical_set(std::move(p.mentions));
    return p;
}

IocRecord canonical(IocRecord r) {
    r.hashtags = canonical_set(std::move(r.hashtags));
    return r;
}

Json schema_header(std::string_view kind) {
    return Json{{"$schema", "ctikit." + std::string(kind)}, {"version", 1}};
}

bool is_schema_header(const Json& j) { return j.is_object() && j.contains("$schema"); }

JsonlWriter::JsonlWriter(const std::filesystem::path& path, std::string_view kind)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
    if (!kind.empty()) write(schema_header(kind));
}

void JsonlWriter::write(const Json& record) {
    out_ << record.dump() << '\n';
    if (!out_) throw Error(ErrorCode::Io, "write failed on '" + path_.string() + "'");
}

void JsonlWriter::close() { out_.close(); }

void for_each_line(const std::filesystem::path& path,
                   const std::function<void(std::size_t, std::string_view)>& visit) {
    if (!std::filesystem::exists(path))
        throw Error(ErrorCode::Io, "file not found: '" + path.string() + "'");
    // gzopen reads uncompressed files transparently as well.
    gzFile file = gzopen(path.c_str(), "rb");
    if (!file) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
    std::string line;
    std::size_t line_no = 0;
    char buffer[1 << 16];
    auto flush = [&] {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        bool blank = std::all_of(line.begin(), line.end(), [](char c) { return text::is_space(c); });
        if (!blank) visit(line_no, line);
        line.clear();
    };
    try {
        while (true) {
            int n = gzread(file, buffer, sizeof buffer);
            if (n < 0) throw Error(ErrorCode::Io, "read error on '" + path.string() + "'");
            if (n == 0) break;
            for (int i = 0; i < n; ++i) {
                if (buffer[i] == '\n')
                    flush();
                else
                    line.push_back(buffer[i]);
            }
        }
        if (!line.empty()) flush();
    } catch (...) {
        gzclose(file);
        throw;
    }
    gzclose(file);
}

void for_each_json(const std::filesystem::path& path,
                   const std::function<void(std::size_t, const Json&)>& visit) {
    bool first = true;
    for_each_line(path, [&](std::size_t line_no, std::string_view line) {
        Json j = Json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw ParseError(line_no, std::string(line.substr(0, 40)), "malformed JSON");
        bool header = first && is_schema_header(j);
        first = false;
        if (header) return;
        visit(line_no, j);
    });
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::Io, "cannot write '" + tmp.string() + "'");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error(ErrorCode::Io, "write failed on '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace ctikit
