#include "ctikit/reliability.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "ctikit/error.hpp"

namespace ctikit::reliability {

namespace {

using Key = std::pair<std::string, IocType>;
__extension__ using Wide = __int128;

void check_ratio(std::int64_t num, std::int64_t den, const char* what) {
    if (den <= 0) throw Error(ErrorCode::Domain, std::string(what) + ": denominator must be positive");
    if (num < 0 || num > den) throw Error(ErrorCode::Domain, std::string(what) + ": numerator outside [0, denominator]");
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string subset_name(ServiceMask mask) {
    std::string out;
    for (auto s : services_in(mask)) {
        if (!out.empty()) out += '+';
        out += short_name(s);
    }
    return out;
}

}  // namespace

double correctness(const ReliabilityCounts& c) {
    check_ratio(c.n_mal, c.n_ioc, "correctness");
    return static_cast<double>(c.n_mal) / static_cast<double>(c.n_ioc) * 100.0;
}

double prop_bot(std::int64_t n_bot_mal, std::int64_t n_tot_mal) {
    check_ratio(n_bot_mal, n_tot_mal, "prop_bot");
    return static_cast<double>(n_bot_mal) / static_cast<double>(n_tot_mal) * 100.0;
}

std::string format_percent(std::int64_t num, std::int64_t den, int decimals) {
    if (den <= 0) throw Error(ErrorCode::Domain, "format_percent: denominator must be positive");
    if (decimals < 0 || decimals > 9) throw Error(ErrorCode::InvalidArgument, "format_percent: decimals out of range");
    bool negative = num < 0;
    Wide scale = 100;
    for (int i = 0; i < decimals; ++i) scale *= 10;
    Wide n = static_cast<Wide>(negative ? -num : num) * scale;
    Wide q = n / den;
    Wide r = n % den;
    if (2 * r > den || (2 * r == den && q % 2 == 1)) ++q;
    Wide unit = scale / 100;
    auto whole = static_cast<long long>(q / unit);
    auto frac = static_cast<long long>(q % unit);
    std::string out = (negative && q != 0 ? "-" : "") + std::to_string(whole);
    if (decimals > 0) {
        std::string f = std::to_string(frac);
        out += "." + std::string(static_cast<std::size_t>(decimals) - f.size(), '0') + f;
    }
    return out;
}

CorrectnessTable correctness_table(const std::vector<IocRecord>& iocs, const std::vector<Verdict>& verdicts) {
    std::set<Key> malicious;
    for (const auto& v : verdicts)
        if (is_malicious(v.status)) malicious.emplace(v.ioc_value, v.ioc_type);
    std::set<Key> seen;
    CorrectnessTable t;
    for (auto k : kAllKinds) t.by_kind[k];
    for (const auto& r : iocs) {
        Key key{r.ioc_value, r.ioc_type};
        if (!seen.insert(key).second) continue;
        bool mal = malicious.count(key) > 0;
        auto& c = t.by_kind[r.ioc_type.kind()];
        ++c.n_ioc;
        ++t.total.n_ioc;
        if (mal) {
            ++c.n_mal;
            ++t.total.n_mal;
        }
    }
    return t;
}

std::int64_t delta_days(Timestamp twitter, Timestamp tis) { return twitter.epoch_day() - tis.epoch_day(); }

std::map<IocType::Kind, std::vector<ServiceId>> default_baselines() {
    return {
        {IocType::Kind::Url, {ServiceId::VirusTotal}},
        {IocType::Kind::Ip, {ServiceId::VirusTotal}},
        {IocType::Kind::Domain, {ServiceId::VirusTotal}},
        {IocType::Kind::Hash, {ServiceId::VirusTotal, ServiceId::AlienVault}},
        {IocType::Kind::Cve, {ServiceId::Nvd}},
    };
}

TimelinessReport timeliness(const std::vector<Verdict>& verdicts, const std::vector<IocRecord>& iocs,
                            const std::map<IocType::Kind, std::vector<ServiceId>>& baselines) {
    std::map<Key, Timestamp> posted;
    for (const auto& r : iocs) {
        Key key{r.ioc_value, r.ioc_type};
        auto [it, inserted] = posted.emplace(key, r.published_date);
        if (!inserted && r.published_date < it->second) it->second = r.published_date;
    }
    std::set<Key> malicious;
    std::map<std::pair<Key, ServiceId>, Timestamp> tis_date;
    for (const auto& v : verdicts) {
        Key key{v.ioc_value, v.ioc_type};
        if (is_malicious(v.status)) malicious.insert(key);
        if (v.first_seen) {
            auto [it, inserted] = tis_date.emplace(std::make_pair(key, v.service), *v.first_seen);
            if (!inserted && *v.first_seen < it->second) it->second = *v.first_seen;
        }
    }

    TimelinessReport report;
    for (const auto& [key, t_twitter] : posted) {
        if (!malicious.count(key)) continue;
        auto kind = key.second.kind();
        auto b = baselines.find(kind);
        if (b == baselines.end()) continue;
        for (auto service : b->second) {
            auto& s = report.summary[{kind, service}];
            auto d = tis_date.find({key, service});
            if (d == tis_date.end()) {
                ++s.skipped;
                continue;
            }
            TimelinessRecord rec{key.first, key.second, service, t_twitter, d->second,
                                 delta_days(t_twitter, d->second)};
            ++s.compared;
            if (rec.delta_days < 0) ++s.earlier;
            report.records.push_back(std::move(rec));
        }
    }
    std::sort(report.records.begin(), report.records.end(), [](const auto& a, const auto& b) {
        return std::tie(a.ioc_type, a.ioc_value, a.baseline) < std::tie(b.ioc_type, b.ioc_value, b.baseline);
    });
    return report;
}

TimelinessReport timeliness(const std::vector<Verdict>& verdicts, const std::vector<IocRecord>& iocs,
                            ServiceId baseline) {
    std::map<IocType::Kind, std::vector<ServiceId>> b;
    for (auto k : kAllKinds)
        if (accepts(baseline, k)) b[k] = {baseline};
    return timeliness(verdicts, iocs, b);
}

std::vector<ServiceId> services_in(ServiceMask mask) {
    std::vector<ServiceId> out;
    for (auto s : kAllServices)
        if (mask & bit(s)) out.push_back(s);
    return out;
}

std::map<IocType::Kind, KindOverlap> overlap(const std::vector<Verdict>& verdicts) {
    std::map<IocType::Kind, KindOverlap> table;
    std::map<Key, ServiceMask> flagged;
    for (const auto& v : verdicts) {
        auto kind = v.ioc_type.kind();
        if (!accepts(v.service, kind)) continue;
        table[kind].services |= bit(v.service);
        Key key{v.ioc_value, v.ioc_type};
        auto& m = flagged[key];
        if (is_malicious(v.status)) m |= bit(v.service);
    }
    for (auto& [kind, t] : table) {
        // all non-empty submasks of t.services
        for (ServiceMask sub = t.services; sub; sub = static_cast<ServiceMask>((sub - 1) & t.services))
            t.counts[sub] = 0;
    }
    for (const auto& [key, mask] : flagged)
        if (mask) ++table[key.second.kind()].counts[mask];
    return table;
}

std::map<std::string, std::map<IocType::Kind, std::int64_t>> monthly_tally(const std::vector<IocRecord>& iocs) {
    std::map<Key, Timestamp> first;
    for (const auto& r : iocs) {
        auto [it, inserted] = first.emplace(Key{r.ioc_value, r.ioc_type}, r.published_date);
        if (!inserted && r.published_date < it->second) it->second = r.published_date;
    }
    std::map<std::string, std::map<IocType::Kind, std::int64_t>> out;
    for (const auto& [key, t] : first) ++out[t.month_string()][key.second.kind()];
    return out;
}

std::string correctness_csv(const CorrectnessTable& table) {
    std::ostringstream out;
    out << "type,n_ioc,n_mal,correctness_pct\n";
    auto row = [&](std::string_view name, const ReliabilityCounts& c) {
        out << name << ',' << c.n_ioc << ',' << c.n_mal << ','
            << (c.n_ioc > 0 ? format_percent(c.n_mal, c.n_ioc) : "") << '\n';
    };
    for (const auto& [kind, c] : table.by_kind) row(family_label(kind), c);
    row("Total", table.total);
    return out.str();
}

std::string timeliness_summary_csv(const TimelinessReport& report) {
    std::ostringstream out;
    out << "type,baseline,compared,earlier,skipped,earlier_pct\n";
    for (const auto& [k, s] : report.summary) {
        out << family_label(k.first) << ',' << short_name(k.second) << ',' << s.compared << ',' << s.earlier
            << ',' << s.skipped << ',' << (s.compared > 0 ? format_percent(s.earlier, s.compared) : "") << '\n';
    }
    return out.str();
}

std::string timeliness_records_csv(const TimelinessReport& report) {
    std::ostringstream out;
    out << "ioc_value,ioc_type,baseline,t_twitter,t_tis,delta_days\n";
    for (const auto& r : report.records) {
        out << csv_field(r.ioc_value) << ',' << r.ioc_type.name() << ',' << short_name(r.baseline) << ','
            << r.t_twitter.date_string() << ',' << r.t_tis.date_string() << ',' << r.delta_days << '\n';
    }
    return out.str();
}

std::string overlap_csv(const std::map<IocType::Kind, KindOverlap>& table) {
    std::ostringstream out;
    out << "type,services,size,count\n";
    for (const auto& [kind, t] : table) {
        for (const auto& [mask, count] : t.counts)
            out << family_label(kind) << ',' << subset_name(mask) << ',' << services_in(mask).size() << ','
                << count << '\n';
    }
    return out.str();
}

std::string monthly_csv(const std::map<std::string, std::map<IocType::Kind, std::int64_t>>& tally) {
    std::ostringstream out;
    out << "month";
    for (auto k : kAllKinds) out << ',' << family_label(k);
    out << ",Total\n";
    for (const auto& [month, counts] : tally) {
        out << month;
        std::int64_t total = 0;
        for (auto k : kAllKinds) {
            auto it = counts.find(k);
            std::int64_t n = it == counts.end() ? 0 : it->second;
            total += n;
            out << ',' << n;
        }
        out << ',' << total << '\n';
    }
    return out.str();
}

std::string text_summary(const CorrectnessTable& correctness, const TimelinessReport& timeliness,
                         const std::map<IocType::Kind, KindOverlap>& overlap) {
    std::ostringstream out;
    out << "Correctness (share of indicators flagged by at least one service)\n";
    auto line = [&](std::string_view name, const ReliabilityCounts& c) {
        out << "  " << name << ": " << c.n_mal << " / " << c.n_ioc;
        if (c.n_ioc > 0) out << " = " << format_percent(c.n_mal, c.n_ioc) << "%";
        out << '\n';
    };
    for (const auto& [kind, c] : correctness.by_kind) line(family_label(kind), c);
    line("Total", correctness.total);
    out << "Timeliness (posted before the baseline service saw it)\n";
    for (const auto& [k, s] : timeliness.summary) {
        out << "  " << family_label(k.first) << " vs " << display_name(k.second) << ": " << s.earlier << " / "
            << s.compared;
        if (s.compared > 0) out << " = " << format_percent(s.earlier, s.compared) << "%";
        out << " (" << s.skipped << " without a date)\n";
    }
    out << "Overlap (largest exclusive intersections)\n";
    for (const auto& [kind, t] : overlap) {
        std::vector<std::pair<std::int64_t, ServiceMask>> ranked;
        for (const auto& [mask, count] : t.counts)
            if (count > 0) ranked.emplace_back(-count, mask);
        std::sort(ranked.begin(), ranked.end());
        out << "  " << family_label(kind) << ":";
        for (std::size_t i = 0; i < ranked.size() && i < 3; ++i)
            out << ' ' << subset_name(ranked[i].second) << '=' << -ranked[i].first;
        out << '\n';
    }
    return out.str();
}

}  // namespace ctikit::reliability
