#include "eigenpattern/metrics.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eigenpattern/errors.hpp"

namespace eigenpattern {

std::int64_t ConfusionMatrix3::total() const {
    std::int64_t t = 0;
    for (const auto& row : counts)
        for (auto v : row) t += v;
    return t;
}

std::int64_t ConfusionMatrix3::trace() const {
    return counts[0][0] + counts[1][1] + counts[2][2];
}

std::int64_t ConfusionMatrix3::row_sum(int row) const {
    return counts[row][0] + counts[row][1] + counts[row][2];
}

ConfusionMatrix3 accumulate(std::span<const PatternClass> truth,
                            std::span<const PatternClass> pred) {
    if (truth.size() != pred.size()) {
        throw DimensionError("accumulate: truth and prediction lengths differ (" +
                             std::to_string(truth.size()) + " vs " + std::to_string(pred.size()) +
                             ")");
    }
    ConfusionMatrix3 cm;
    for (std::size_t i = 0; i < truth.size(); ++i) cm.add(truth[i], pred[i]);
    return cm;
}

MetricsReport compute_metrics(const ConfusionMatrix3& cm) {
    const std::int64_t total = cm.total();
    if (total <= 0) throw NumericalError("compute_metrics: empty confusion matrix");
    for (int i = 0; i < 3; ++i) {
        if (cm.row_sum(i) == 0) {
            throw NumericalError(std::string("compute_metrics: recall ") +
                                 class_letter(static_cast<PatternClass>(i)) +
                                 " undefined (no ground-truth samples)");
        }
    }
    MetricsReport r;
    r.sample_count = total;
    r.accuracy = 100.0 * static_cast<double>(cm.trace()) / static_cast<double>(total);
    r.error = 100.0 - r.accuracy;
    r.recall_a = 100.0 * static_cast<double>(cm.counts[0][0]) / static_cast<double>(cm.row_sum(0));
    r.recall_b = 100.0 * static_cast<double>(cm.counts[1][1]) / static_cast<double>(cm.row_sum(1));
    r.recall_c = 100.0 * static_cast<double>(cm.counts[2][2]) / static_cast<double>(cm.row_sum(2));
    return r;
}

namespace {

MeanStd mean_std(const std::vector<double>& values) {
    MeanStd ms;
    const auto n = static_cast<double>(values.size());
    for (double v : values) ms.mean += v;
    ms.mean /= n;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - ms.mean) * (v - ms.mean);
        ms.stddev = std::sqrt(ss / (n - 1.0));
    }
    return ms;
}

}  // namespace

CycleAggregate aggregate_cycles(const std::vector<MetricsReport>& reports) {
    if (reports.empty()) throw ValidationError("aggregate_cycles: no reports");
    std::vector<double> err, acc, ra, rb, rc;
    for (const auto& r : reports) {
        err.push_back(r.error);
        acc.push_back(r.accuracy);
        ra.push_back(r.recall_a);
        rb.push_back(r.recall_b);
        rc.push_back(r.recall_c);
    }
    CycleAggregate agg;
    agg.error = mean_std(err);
    agg.accuracy = mean_std(acc);
    agg.recall_a = mean_std(ra);
    agg.recall_b = mean_std(rb);
    agg.recall_c = mean_std(rc);
    agg.cycle_count = reports.size();
    return agg;
}

std::string report_to_csv(const MetricsReport& report) {
    std::ostringstream out;
    out << "metric,value\n"
        << "accuracy_pct," << report.accuracy << '\n'
        << "error_pct," << report.error << '\n'
        << "recall_a_pct," << report.recall_a << '\n'
        << "recall_b_pct," << report.recall_b << '\n'
        << "recall_c_pct," << report.recall_c << '\n'
        << "sample_count," << report.sample_count << '\n';
    return out.str();
}

std::string report_to_json(const MetricsReport& report) {
    nlohmann::json j{{"accuracy_pct", report.accuracy}, {"error_pct", report.error},
                     {"recall_a_pct", report.recall_a}, {"recall_b_pct", report.recall_b},
                     {"recall_c_pct", report.recall_c}, {"sample_count", report.sample_count}};
    return j.dump(2);
}

}  // namespace eigenpattern
