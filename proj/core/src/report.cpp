#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "latefusion/eval.hpp"

namespace latefusion {

namespace {

std::string quote(const std::string &s)
{
    return nlohmann::json(s).dump();
}

std::string fixed(double v)
{
    return fmt::format("{:.6f}", v);
}

std::string format_json(const ApReport &report)
{
    std::string out = "{\n  \"metadata\": {";
    for (std::size_t i = 0; i < report.metadata.size(); ++i) {
        const auto &[k, v] = report.metadata[i];
        out += fmt::format("{}\n    {}: {}", i ? "," : "", quote(k), quote(v));
    }
    out += report.metadata.empty() ? "},\n" : "\n  },\n";
    out += "  \"bands\": [";
    for (std::size_t b = 0; b < report.bands.size(); ++b) {
        const BandReport &br = report.bands[b];
        out += fmt::format("{}\n    {{\n      \"difficulty\": {},\n", b ? "," : "", quote(std::string(to_string(br.difficulty))));
        if (br.ap_11)
            out += fmt::format("      \"ap_11\": {},\n", fixed(*br.ap_11));
        if (br.ap_40)
            out += fmt::format("      \"ap_40\": {},\n", fixed(*br.ap_40));
        out += fmt::format("      \"gt_count\": {},\n      \"tp\": {},\n      \"fp\": {},\n      \"fn\": {},\n",
                           br.gt_count, br.tp, br.fp, br.fn);
        out += "      \"pr_curve\": [";
        for (std::size_t i = 0; i < br.pr_curve.size(); ++i) {
            const PRPoint &p = br.pr_curve[i];
            out += fmt::format("{}\n        {{\"score_threshold\": {}, \"precision\": {}, \"recall\": {}, \"tp\": {}, \"fp\": {}, \"fn\": {}}}",
                               i ? "," : "", fixed(p.score_threshold), fixed(p.precision), fixed(p.recall), p.tp, p.fp, p.fn);
        }
        out += br.pr_curve.empty() ? "]\n    }" : "\n      ]\n    }";
    }
    out += report.bands.empty() ? "]\n}\n" : "\n  ]\n}\n";
    return out;
}

std::string format_csv(const ApReport &report)
{
    std::string out = "difficulty,score_threshold,precision,recall,tp,fp,fn\n";
    for (const auto &br : report.bands)
        for (const auto &p : br.pr_curve)
            out += fmt::format("{},{},{},{},{},{},{}\n", to_string(br.difficulty), fixed(p.score_threshold),
                               fixed(p.precision), fixed(p.recall), p.tp, p.fp, p.fn);
    return out;
}

} // namespace

std::string format_report(const ApReport &report, ReportFormat format)
{
    return format == ReportFormat::Json ? format_json(report) : format_csv(report);
}

void emit_report(const ApReport &report, const std::filesystem::path &path, ReportFormat format)
{
    write_text_file(path, format_report(report, format));
}

ApReport parse_report_json(std::string_view text)
{
    try {
        const auto doc = nlohmann::ordered_json::parse(text);
        ApReport report;
        for (const auto &[k, v] : doc.at("metadata").items())
            report.metadata.emplace_back(k, v.get<std::string>());
        for (const auto &b : doc.at("bands")) {
            BandReport br;
            br.difficulty = parse_difficulty(b.at("difficulty").get<std::string>());
            if (b.contains("ap_11"))
                br.ap_11 = b.at("ap_11").get<double>();
            if (b.contains("ap_40"))
                br.ap_40 = b.at("ap_40").get<double>();
            br.gt_count = b.at("gt_count").get<std::size_t>();
            br.tp = b.at("tp").get<std::size_t>();
            br.fp = b.at("fp").get<std::size_t>();
            br.fn = b.at("fn").get<std::size_t>();
            for (const auto &p : b.at("pr_curve")) {
                PRPoint pt;
                pt.score_threshold = p.at("score_threshold").get<double>();
                pt.precision = p.at("precision").get<double>();
                pt.recall = p.at("recall").get<double>();
                pt.tp = p.at("tp").get<std::size_t>();
                pt.fp = p.at("fp").get<std::size_t>();
                pt.fn = p.at("fn").get<std::size_t>();
                br.pr_curve.push_back(pt);
            }
            report.bands.push_back(std::move(br));
        }
        return report;
    } catch (const nlohmann::json::exception &e) {
        throw InputError(fmt::format("malformed report: {}", e.what()));
    }
}

std::string format_band_csv(const BandHistogram &h)
{
    std::string out = "band,tp,fp\n";
    for (std::size_t b = 0; b < BandHistogram::bins; ++b)
        out += fmt::format("{:.1f}-{:.1f},{},{}\n", b / 10.0, (b + 1) / 10.0, h.tp[b], h.fp[b]);
    return out;
}

} // namespace latefusion
