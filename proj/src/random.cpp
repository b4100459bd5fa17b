#include <litkg/error.hpp>
#include <litkg/random.hpp>

#include <numeric>

namespace litkg {

AliasTable::AliasTable(std::span<const double> weights)
    : prob_(weights.size()), alias_(weights.size(), 0) {
    const std::size_t n = weights.size();
    const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (n == 0 || !(sum > 0.0)) throw Error(ErrorCode::validation, "alias table needs positive mass");

    std::vector<double> scaled(n);
    std::vector<std::uint32_t> small;
    std::vector<std::uint32_t> large;
    for (std::size_t i = 0; i < n; ++i) {
        scaled[i] = weights[i] * static_cast<double>(n) / sum;
        (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    while (!small.empty() && !large.empty()) {
        const auto s = small.back();
        small.pop_back();
        const auto l = large.back();
        prob_[s] = scaled[s];
        alias_[s] = l;
        scaled[l] = (scaled[l] + scaled[s]) - 1.0;
        if (scaled[l] < 1.0) {
            large.pop_back();
            small.push_back(l);
        }
    }
    for (auto i : large) prob_[i] = 1.0;
    for (auto i : small) prob_[i] = 1.0;  // rounding leftovers
}

std::size_t AliasTable::sample(Rng& rng) const {
    // One draw: the high word of x * n picks the column and the low word,
    // the fractional part, is the uniform for the coin flip.
    const auto product = static_cast<unsigned __int128>(rng()) * prob_.size();
    const auto column = static_cast<std::size_t>(product >> 64);
    const double coin = static_cast<double>(static_cast<std::uint64_t>(product) >> 11) * 0x1.0p-53;
    return coin < prob_[column] ? column : alias_[column];
}

}  // namespace litkg
