#pragma once

#include <string_view>

// Generated at configure time from data/*.txt.
namespace ctikit::data {
extern const std::string_view kTldsV1;
extern const std::string_view kStopwordsEnV1;
}  // namespace ctikit::data
