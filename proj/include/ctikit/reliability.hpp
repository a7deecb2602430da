#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ctikit/types.hpp"

namespace ctikit::reliability {

struct ReliabilityCounts {
    std::int64_t n_ioc = 0;
    std::int64_t n_mal = 0;
};

/// n_mal / n_ioc * 100. Throws Error(Domain) if n_ioc <= 0 or n_mal is outside [0, n_ioc].
double correctness(const ReliabilityCounts& counts);

/// n_bot_mal / n_tot_mal * 100, same preconditions.
double prop_bot(std::int64_t n_bot_mal, std::int64_t n_tot_mal);

/// num/den*100 rendered with `decimals` places, rounded half to even on the exact
/// rational value (no binary floating point in between).
std::string format_percent(std::int64_t num, std::int64_t den, int decimals = 2);

/// Indicator counted once per (value, type); malicious if any verdict says so.
struct CorrectnessTable {
    std::map<IocType::Kind, ReliabilityCounts> by_kind;
    ReliabilityCounts total;
};
CorrectnessTable correctness_table(const std::vector<IocRecord>& iocs, const std::vector<Verdict>& verdicts);

struct TimelinessRecord {
    std::string ioc_value;
    IocType ioc_type;
    ServiceId baseline = ServiceId::VirusTotal;
    Timestamp t_twitter;
    Timestamp t_tis;
    std::int64_t delta_days = 0;  // t_twitter - t_tis in whole UTC days
};

/// Whole-day difference of the UTC calendar dates; negative when `twitter` is earlier.
std::int64_t delta_days(Timestamp twitter, Timestamp tis);

struct TimelinessSummary {
    std::int64_t compared = 0;
    std::int64_t earlier = 0;  // delta < 0
    std::int64_t skipped = 0;  // malicious but no baseline date
};

struct TimelinessReport {
    std::vector<TimelinessRecord> records;
    std::map<std::pair<IocType::Kind, ServiceId>, TimelinessSummary> summary;
};

/// Baseline services per kind: URL/IP/domain against VirusTotal, hashes against
/// VirusTotal and AlienVault, CVEs against NVD.
std::map<IocType::Kind, std::vector<ServiceId>> default_baselines();

TimelinessReport timeliness(const std::vector<Verdict>& verdicts, const std::vector<IocRecord>& iocs,
                            const std::map<IocType::Kind, std::vector<ServiceId>>& baselines = default_baselines());

/// Single baseline for every kind it accepts.
TimelinessReport timeliness(const std::vector<Verdict>& verdicts, const std::vector<IocRecord>& iocs,
                            ServiceId baseline);

using ServiceMask = std::uint8_t;  // bit (1 << service index)

inline ServiceMask bit(ServiceId s) { return static_cast<ServiceMask>(1u << static_cast<unsigned>(s)); }
std::vector<ServiceId> services_in(ServiceMask mask);

struct KindOverlap {
    ServiceMask services = 0;                  // accepting services seen in the verdicts
    std::map<ServiceMask, std::int64_t> counts; // every non-empty subset of `services`
};

/// Exclusive intersections: each indicator adds one to the exact set of services
/// that flagged it.
std::map<IocType::Kind, KindOverlap> overlap(const std::vector<Verdict>& verdicts);

/// month ("YYYY-MM") -> kind -> distinct indicators first seen that month.
std::map<std::string, std::map<IocType::Kind, std::int64_t>> monthly_tally(const std::vector<IocRecord>& iocs);

std::string correctness_csv(const CorrectnessTable& table);
std::string timeliness_summary_csv(const TimelinessReport& report);
std::string timeliness_records_csv(const TimelinessReport& report);
std::string overlap_csv(const std::map<IocType::Kind, KindOverlap>& table);
std::string monthly_csv(const std::map<std::string, std::map<IocType::Kind, std::int64_t>>& tally);
std::string text_summary(const CorrectnessTable& correctness, const TimelinessReport& timeliness,
                         const std::map<IocType::Kind, KindOverlap>& overlap);

}  // namespace ctikit::reliability
