#include "sentdyn/initiation.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <utility>

#include <boost/multiprecision/cpp_int.hpp>

namespace sentdyn {

namespace {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

cpp_int binomial(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    cpp_int r = 1;
    for (std::size_t j = 1; j <= k; ++j) {
        r *= n - k + j;
        r /= j;
    }
    return r;
}

} // namespace

double FirstInitiationPmf::cdf(std::size_t i) const {
    if (i == 0) return 0.0;
    return cumulative[std::min(i, cumulative.size()) - 1];
}

FirstInitiationPmf first_initiation_pmf(std::size_t n_initiations, std::size_t n_participations) {
    if (n_initiations == 0) throw std::invalid_argument("first_initiation_pmf needs at least one initiation");
    const std::size_t total = n_initiations + n_participations;
    const cpp_int sequences = binomial(total, n_initiations);
    FirstInitiationPmf out{n_initiations, n_participations, {}, {}};
    out.pmf.reserve(n_participations + 1);
    out.cumulative.reserve(n_participations + 1);
    for (std::size_t i = 1; i <= n_participations + 1; ++i) {
        const cpp_rational p(binomial(total - i, n_initiations - 1), sequences);
        out.pmf.push_back(p.convert_to<double>());
        // Complement of "the first i are all participations".
        const cpp_rational c = 1 - cpp_rational(binomial(total - i, n_initiations), sequences);
        out.cumulative.push_back(c.convert_to<double>());
    }
    return out;
}

RhoCurves rho_curves(const std::vector<DiscussionSequence>& sequences, std::size_t max_i) {
    if (max_i < 1) throw std::invalid_argument("max_i must be at least 1");
    if (sequences.empty()) throw std::invalid_argument("rho_curves needs at least one sequence");

    RhoCurves out{std::vector<double>(max_i, 0.0), std::vector<double>(max_i, 0.0)};
    std::map<std::pair<std::size_t, std::size_t>, FirstInitiationPmf> cache;
    for (const auto& s : sequences) {
        if (s.n_initiations == 0) continue;
        const auto first = static_cast<std::size_t>(
            std::find(s.labels.begin(), s.labels.end(), Label::initiation) - s.labels.begin()) + 1;
        const auto key = std::make_pair(s.n_initiations, s.n_participations);
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, first_initiation_pmf(key.first, key.second)).first;
        const FirstInitiationPmf& pmf = it->second;
        for (std::size_t i = 1; i <= max_i; ++i) {
            if (first <= i) out.observed[i - 1] += 1.0;
            out.expected[i - 1] += pmf.cdf(i);
        }
    }
    const auto users = static_cast<double>(sequences.size());
    for (std::size_t i = 0; i < max_i; ++i) {
        out.observed[i] /= users;
        out.expected[i] /= users;
    }
    return out;
}

} // namespace sentdyn
