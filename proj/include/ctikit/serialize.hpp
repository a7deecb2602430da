#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ctikit/types.hpp"

namespace ctikit {

using Json = nlohmann::json;

// nlohmann ADL hooks. from_json throws ctikit::Error(Parse) when an invariant fails.
void to_json(Json& j, const PostRecord& p);
void from_json(const Json& j, PostRecord& p);
void to_json(Json& j, const AccountProfile& a);
void from_json(const Json& j, AccountProfile& a);
void to_json(Json& j, const IocRecord& r);
void from_json(const Json& j, IocRecord& r);
void to_json(Json& j, const Verdict& v);
void from_json(const Json& j, Verdict& v);

/// Sorted keys, set-valued lists sorted, strings NFC, timestamps "YYYY-MM-DDTHH:MM:SSZ".
template <class T>
std::string canonical_serialize(const T& record) {
    return Json(record).dump();
}

template <class T>
T deserialize(std::string_view bytes) {
    return Json::parse(bytes).get<T>();
}

PostRecord canonical(PostRecord p);
IocRecord canonical(IocRecord r);

/// Schema header that opens every JSONL artifact this toolkit writes.
Json schema_header(std::string_view kind);
bool is_schema_header(const Json& j);

class JsonlWriter {
public:
    /// Empty `kind` suppresses the schema header line.
    JsonlWriter(const std::filesystem::path& path, std::string_view kind);
    void write(const Json& record);
    void close();

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

/// Streams non-empty lines of a .jsonl (or .jsonl.gz) file. The callback gets the
/// 1-based line number and the raw line. Throws Error(Io) when the file is missing.
void for_each_line(const std::filesystem::path& path,
                   const std::function<void(std::size_t, std::string_view)>& visit);

/// Parses each line as JSON, skipping a leading schema header. Malformed JSON
/// raises ParseError with the line number.
void for_each_json(const std::filesystem::path& path,
                   const std::function<void(std::size_t, const Json&)>& visit);

std::string read_file(const std::filesystem::path& path);
/// Write-temp-then-rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace ctikit
