#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eigenpattern/dataset.hpp"

namespace eigenpattern {

// 3x3 counts; rows are ground truth (A,B,C), columns are predictions.
struct ConfusionMatrix3 {
    std::array<std::array<std::int64_t, 3>, 3> counts{};

    std::int64_t total() const;
    std::int64_t trace() const;
    std::int64_t row_sum(int row) const;
    void add(PatternClass truth, PatternClass pred) {
        counts[static_cast<int>(truth)][static_cast<int>(pred)]++;
    }
};

ConfusionMatrix3 accumulate(std::span<const PatternClass> truth,
                            std::span<const PatternClass> pred);

// All values in percent. error is computed as 100 - accuracy so the two are
// complementary exactly.
struct MetricsReport {
    double accuracy = 0.0;
    double error = 0.0;
    double recall_a = 0.0;
    double recall_b = 0.0;
    double recall_c = 0.0;
    std::int64_t sample_count = 0;

    double recall(int cls) const {
        return cls == 0 ? recall_a : cls == 1 ? recall_b : recall_c;
    }
};

// Throws NumericalError if the matrix is empty or a ground-truth row is empty
// (its recall would be undefined).
MetricsReport compute_metrics(const ConfusionMatrix3& cm);

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;  // sample std, 0 for a single value
};

struct CycleAggregate {
    MeanStd error;
    MeanStd accuracy;
    MeanStd recall_a;
    MeanStd recall_b;
    MeanStd recall_c;
    std::size_t cycle_count = 0;
};

CycleAggregate aggregate_cycles(const std::vector<MetricsReport>& reports);

// file,key,value rows for the CLI.
std::string report_to_csv(const MetricsReport& report);
std::string report_to_json(const MetricsReport& report);

}  // namespace eigenpattern
