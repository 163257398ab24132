#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rrglab/spectral.hpp"

namespace rrglab {

/// Welford accumulator; merge is associative and commutative up to rounding.
class RunningStats {
public:
    void add(double x);
    void merge(const RunningStats& other);

    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const;  ///< unbiased; 0 for fewer than two values
    double stderr_of_mean() const;

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

/// One named scalar with its uncertainty.
struct Summary {
    std::string name;
    double value = 0.0;
    double stderr_ = 0.0;
    std::size_t n_samples = 0;
};

Summary summarize(std::string name, const RunningStats& s);
Summary summarize(std::string name, const Estimate& e);

struct StatisticsReport {
    std::vector<Summary> entries;

    void add(Summary s) { entries.push_back(std::move(s)); }
    const Summary* find(const std::string& name) const;
    /// JSON array of {name, value, stderr, n_samples}.
    std::string to_json() const;
};

/// Normalised histogram on [lo, hi] as (bin centre, density) pairs.
std::vector<std::pair<double, double>> histogram_density(std::span<const double> values, double lo,
                                                         double hi, int bins);

// CSV emitters: header row, '.' decimals, LF endings.
void write_gaps_csv(std::ostream& out, const GapEnsemble& gaps);
void write_series_csv(std::ostream& out, const std::string& x_name, const std::string& y_name,
                      std::span<const std::pair<double, double>> series);

}  // namespace rrglab
