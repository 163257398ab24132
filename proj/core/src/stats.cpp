#include "rrglab/stats.hpp"

#include <cmath>
#include <ostream>

#include <json.hpp>

#include "rrglab/error.hpp"

namespace rrglab {

void RunningStats::add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
}

void RunningStats::merge(const RunningStats& other) {
    if (other.n_ == 0) return;
    if (n_ == 0) {
        *this = other;
        return;
    }
    const double total = static_cast<double>(n_ + other.n_);
    const double delta = other.mean_ - mean_;
    mean_ += delta * static_cast<double>(other.n_) / total;
    m2_ += other.m2_ + delta * delta * static_cast<double>(n_) * static_cast<double>(other.n_) / total;
    n_ += other.n_;
}

double RunningStats::variance() const {
    return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1);
}

double RunningStats::stderr_of_mean() const {
    return n_ < 2 ? 0.0 : std::sqrt(variance() / static_cast<double>(n_));
}

Summary summarize(std::string name, const RunningStats& s) {
    return Summary{std::move(name), s.mean(), s.stderr_of_mean(), s.count()};
}

Summary summarize(std::string name, const Estimate& e) {
    return Summary{std::move(name), e.value, e.stderr_, e.n_samples};
}

const Summary* StatisticsReport::find(const std::string& name) const {
    for (const auto& s : entries)
        if (s.name == name) return &s;
    return nullptr;
}

std::string StatisticsReport::to_json() const {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& s : entries) {
        nlohmann::ordered_json j;
        j["name"] = s.name;
        j["value"] = std::isfinite(s.value) ? nlohmann::ordered_json(s.value) : nlohmann::ordered_json(nullptr);
        j["stderr"] = s.stderr_;
        j["n_samples"] = s.n_samples;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::vector<std::pair<double, double>> histogram_density(std::span<const double> values, double lo,
                                                         double hi, int bins) {
    if (bins < 1 || !(hi > lo)) throw ParameterError("histogram_density: need bins >= 1 and hi > lo");
    std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
    const double width = (hi - lo) / bins;
    for (double v : values) {
        if (v < lo || v > hi) continue;
        const int b = std::min(bins - 1, static_cast<int>((v - lo) / width));
        counts[static_cast<std::size_t>(b)] += 1.0;
    }
    std::vector<std::pair<double, double>> out;
    const double norm = values.empty() ? 0.0 : 1.0 / (static_cast<double>(values.size()) * width);
    for (int b = 0; b < bins; ++b)
        out.emplace_back(lo + (b + 0.5) * width, counts[static_cast<std::size_t>(b)] * norm);
    return out;
}

void write_gaps_csv(std::ostream& out, const GapEnsemble& gaps) {
    out.precision(17);
    out << "sample_id,index,gap\n";
    for (std::size_t k = 0; k < gaps.size(); ++k)
        out << gaps.sample_ids[k] << ',' << gaps.indices[k] << ',' << gaps.entries[k] << '\n';
}

void write_series_csv(std::ostream& out, const std::string& x_name, const std::string& y_name,
                      std::span<const std::pair<double, double>> series) {
    out.precision(17);
    out << x_name << ',' << y_name << '\n';
    for (const auto& [x, y] : series) out << x << ',' << y << '\n';
}

}  // namespace rrglab
