#include "sparsegen/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <unordered_map>

#include "json.hpp"
#include "sparsegen/stats.hpp"
#include "sparsegen/util.hpp"

namespace sparsegen {

std::vector<RegionAccuracy> region_accuracy(const std::vector<ReducedPoint>& points,
                                            const std::vector<PredictionRecord>& predictions,
                                            const GridSpec& spec, uint64_t min_count) {
    std::unordered_map<std::string, const ReducedPoint*> by_id;
    for (const auto& p : points) by_id.emplace(p.id, &p);

    std::vector<ReducedPoint> predicted_points;
    std::unordered_map<std::string, bool> verdicts;
    predicted_points.reserve(predictions.size());
    for (const auto& pred : predictions) {
        auto it = by_id.find(pred.example_id);
        if (it == by_id.end()) {
            throw ConfigError("region_accuracy: prediction id " + pred.example_id +
                              " has no reduced point");
        }
        if (!verdicts.emplace(pred.example_id, pred.correct).second) {
            throw ConfigError("region_accuracy: duplicate prediction for " + pred.example_id);
        }
        predicted_points.push_back(*it->second);
    }
    if (predicted_points.empty()) return {};

    // The grid spans the full point cloud, not just the predicted subset.
    BoundingBox box = bounding_box(points);
    GridScan scan = scan_grid(predicted_points, spec, box);

    std::vector<RegionAccuracy> out;
    for (const auto& cell : scan.cells) {
        if (cell.count < min_count) continue;
        uint64_t correct = 0;
        for (const auto& id : cell.member_ids) {
            if (verdicts.at(id)) ++correct;
        }
        RegionAccuracy ra;
        ra.cell_id = cell.cell_id;
        ra.count = cell.count;
        ra.accuracy = double(correct) / double(cell.count);
        out.push_back(std::move(ra));
    }
    return out;
}

namespace {

std::pair<double, double> pearson_with_p(const std::vector<double>& xs,
                                         const std::vector<double>& ys) {
    const size_t n = xs.size();
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double dx = xs[i] - mx;
        double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw ConfigError("correlation: degenerate input");
    double r = sxy / std::sqrt(sxx * syy);
    r = std::clamp(r, -1.0, 1.0);

    const double dof = double(n) - 2.0;
    double p;
    if (std::abs(r) >= 1.0) {
        p = 0.0;
    } else {
        double t = r * std::sqrt(dof / (1.0 - r * r));
        p = stats::student_t_two_sided_p(t, dof);
    }
    return {r, p};
}

}  // namespace

std::pair<double, double> pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw ConfigError("correlation: length mismatch");
    if (xs.size() < 3) throw ConfigError("correlation: need at least 3 observations");
    return pearson_with_p(xs, ys);
}

std::vector<double> average_ranks(const std::vector<double>& values) {
    const size_t n = values.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        double avg = (double(i) + double(j)) / 2.0 + 1.0;  // ranks are 1-based
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

std::pair<double, double> spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw ConfigError("correlation: length mismatch");
    if (xs.size() < 3) throw ConfigError("correlation: need at least 3 observations");
    return pearson_with_p(average_ranks(xs), average_ranks(ys));
}

CorrelationReport correlate_regions(const std::vector<RegionAccuracy>& regions) {
    std::vector<double> counts, accuracies;
    counts.reserve(regions.size());
    accuracies.reserve(regions.size());
    for (const auto& r : regions) {
        counts.push_back(double(r.count));
        accuracies.push_back(r.accuracy);
    }
    auto [r, rp] = pearson(counts, accuracies);
    auto [rho, rhop] = spearman(counts, accuracies);
    CorrelationReport report;
    report.pearson_r = r;
    report.pearson_p = rp;
    report.spearman_rho = rho;
    report.spearman_p = rhop;
    report.n_regions = regions.size();
    return report;
}

std::string histogram_to_csv(const DensityHistogram& histogram) {
    std::string csv = "count,cells\n";
    csv += "0," + std::to_string(histogram.empty_cells) + "\n";
    for (const auto& [count, cells] : histogram.buckets) {
        csv += std::to_string(count) + "," + std::to_string(cells) + "\n";
    }
    return csv;
}

std::string regions_to_csv(uint32_t dims, const std::vector<SparseRegion>& regions) {
    std::string csv = "region_id";
    for (uint32_t d = 0; d < dims; ++d) csv += ",origin_" + std::to_string(d);
    for (uint32_t d = 0; d < dims; ++d) csv += ",size_" + std::to_string(d);
    csv += ",count\n";
    for (const auto& r : regions) {
        csv += r.region_id;
        for (double v : r.origin) csv += "," + format_double(v);
        for (double v : r.cell_size) csv += "," + format_double(v);
        csv += "," + std::to_string(r.count) + "\n";
    }
    return csv;
}

std::string region_accuracy_to_csv(const std::vector<RegionAccuracy>& accuracy) {
    std::string csv = "cell_id,count,accuracy\n";
    for (const auto& ra : accuracy) {
        csv += ra.cell_id + "," + std::to_string(ra.count) + "," + format_double(ra.accuracy) +
               "\n";
    }
    return csv;
}

std::string correlation_to_json(const CorrelationReport& report) {
    nlohmann::ordered_json j;
    j["pearson_r"] = report.pearson_r;
    j["pearson_p"] = report.pearson_p;
    j["spearman_rho"] = report.spearman_rho;
    j["spearman_p"] = report.spearman_p;
    j["n_regions"] = report.n_regions;
    return j.dump(2) + "\n";
}

CorrelationReport correlation_from_json(const std::string& text) {
    CorrelationReport report;
    try {
        auto j = nlohmann::json::parse(text);
        report.pearson_r = j.at("pearson_r").get<double>();
        report.pearson_p = j.at("pearson_p").get<double>();
        report.spearman_rho = j.at("spearman_rho").get<double>();
        report.spearman_p = j.at("spearman_p").get<double>();
        report.n_regions = j.at("n_regions").get<uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("correlation report: ") + e.what());
    }
    return report;
}

std::vector<std::string> emit_reports(const GridScan& scan, const DensityHistogram& histogram,
                                      const std::vector<SparseRegion>& regions,
                                      const std::optional<std::vector<RegionAccuracy>>& accuracy,
                                      const std::optional<CorrelationReport>& correlation,
                                      const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> written;
    auto emit = [&](const std::string& name, const std::string& body) {
        std::string path = out_dir + "/" + name;
        write_file(path, body);
        written.push_back(path);
    };

    emit("density_histogram.csv", histogram_to_csv(histogram));
    emit("sparse_regions.csv", regions_to_csv(scan.box.dims(), regions));
    if (accuracy) emit("region_accuracy.csv", region_accuracy_to_csv(*accuracy));
    if (correlation) emit("correlation.json", correlation_to_json(*correlation));
    return written;
}

}  // namespace sparsegen
