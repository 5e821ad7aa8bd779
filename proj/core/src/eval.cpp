#include "platoonlab/eval.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "platoonlab/util.hpp"

namespace platoonlab {

ConfusionCounts confusion(const std::vector<std::pair<bool, bool>>& truth_pred) {
    ConfusionCounts c;
    for (auto [truth, pred] : truth_pred) {
        if (truth && pred)
            ++c.tp;
        else if (!truth && pred)
            ++c.fp;
        else if (!truth && !pred)
            ++c.tn;
        else
            ++c.fn;
    }
    return c;
}

Scores score(const ConfusionCounts& c) {
    const std::int64_t n = c.total();
    if (n <= 0) throw std::invalid_argument("score: empty validation set");
    if (c.tp < 0 || c.fp < 0 || c.tn < 0 || c.fn < 0)
        throw std::invalid_argument("score: negative count");
    Scores s;
    s.ce = static_cast<double>(c.fp + c.fn) / static_cast<double>(n) * 100.0;
    if (c.tp + c.fn > 0) s.tpr = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    if (c.tp + c.fp > 0) s.ppv = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    if (2 * c.tp + c.fp + c.fn > 0)
        s.f1 = static_cast<double>(2 * c.tp) / static_cast<double>(2 * c.tp + c.fp + c.fn);
    return s;
}

std::vector<std::pair<int, double>> cdf(std::vector<int> errors) {
    std::vector<std::pair<int, double>> points;
    if (errors.empty()) return points;
    std::sort(errors.begin(), errors.end());
    const double n = static_cast<double>(errors.size());
    std::size_t k = 0;
    while (k < errors.size()) {
        int value = errors[k];
        while (k < errors.size() && errors[k] == value) ++k;
        points.emplace_back(value, static_cast<double>(k) / n * 100.0);
    }
    return points;
}

std::string results_csv_header() { return "strategy,n_train,seed,ce,tpr,ppv,f1\n"; }

std::string results_csv_row(const std::string& strategy, int n_train, std::uint64_t seed,
                            const Scores& s) {
    std::ostringstream out;
    auto opt = [](const std::optional<double>& v) {
        return v ? format_double(*v) : std::string{};
    };
    out << strategy << "," << n_train << "," << seed << "," << format_double(s.ce) << ","
        << opt(s.tpr) << "," << opt(s.ppv) << "," << opt(s.f1) << "\n";
    return out.str();
}

std::string cdf_csv_header() { return "strategy,n_train,error,cum_pct\n"; }

std::string cdf_csv_rows(const std::string& strategy, int n_train,
                         const std::vector<std::pair<int, double>>& cdf_points) {
    std::ostringstream out;
    for (const auto& [err, pct] : cdf_points)
        out << strategy << "," << n_train << "," << err << "," << format_double(pct) << "\n";
    return out.str();
}

} // namespace platoonlab
