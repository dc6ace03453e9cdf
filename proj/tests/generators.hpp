#pragma once

// Random states and elements for property tests.

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "loqec/linear_element.hpp"
#include "loqec/state.hpp"
#include "oracle.hpp"

namespace gen {

inline std::vector<loqec::PathId> path_pool(int n = 6) {
    std::vector<loqec::PathId> out;
    for (int i = 0; i < n; ++i) out.emplace_back("p" + std::to_string(i));
    return out;
}

/// Normalized state on 2-4 random paths from the pool, dense over all pairs of their modes.
inline loqec::TwoPhotonState random_state(std::mt19937_64& rng) {
    auto pool = path_pool();
    std::shuffle(pool.begin(), pool.end(), rng);
    const int npaths = std::uniform_int_distribution<int>(2, 4)(rng);
    std::vector<loqec::PathId> paths(pool.begin(), pool.begin() + npaths);
    std::vector<loqec::ModeLabel> modes;
    for (const auto& p : paths)
        for (auto pol : loqec::kPolarizations)
            for (int t = 0; t < loqec::kTemporalModes; ++t) modes.emplace_back(p, pol, t);

    std::normal_distribution<double> g;
    std::bernoulli_distribution keep(0.5);
    loqec::TwoPhotonState::Amplitudes amps;
    double n = 0.0;
    for (std::size_t i = 0; i < modes.size(); ++i)
        for (std::size_t j = i; j < modes.size(); ++j) {
            if (!keep(rng)) continue;
            const loqec::Complex c(g(rng), g(rng));
            amps[loqec::ModePair(modes[i], modes[j])] = c;
            n += std::norm(c);
        }
    if (n == 0.0) {
        amps[loqec::ModePair(modes[0], modes[1])] = 1.0;
        n = 1.0;
    }
    for (auto& [p, c] : amps) c /= std::sqrt(n);
    return loqec::TwoPhotonState(std::set<loqec::PathId>(paths.begin(), paths.end()), std::move(amps));
}

/// Haar-random element on 1-3 of the state's paths, sometimes routing to fresh paths.
inline loqec::LinearElement random_element(const loqec::TwoPhotonState& s, std::mt19937_64& rng) {
    std::vector<loqec::PathId> declared(s.paths().begin(), s.paths().end());
    std::shuffle(declared.begin(), declared.end(), rng);
    const int k = std::uniform_int_distribution<int>(1, std::min<int>(3, int(declared.size())))(rng);
    std::vector<loqec::PathId> inputs(declared.begin(), declared.begin() + k);

    std::vector<loqec::PathId> fresh;
    for (const auto& p : path_pool())
        if (!s.paths().contains(p)) fresh.push_back(p);
    std::vector<loqec::PathId> outputs = inputs;
    if (std::bernoulli_distribution(0.5)(rng)) {
        std::shuffle(outputs.begin(), outputs.end(), rng);
    } else {
        std::shuffle(fresh.begin(), fresh.end(), rng);
        for (std::size_t i = 0; i < outputs.size() && i < fresh.size(); ++i)
            if (std::bernoulli_distribution(0.5)(rng)) outputs[i] = fresh[i];
    }
    return loqec::LinearElement("random", inputs, outputs, oracle::random_unitary(2 * k, rng));
}

/// All paths that appear in either the state or the element.
inline std::vector<loqec::PathId> all_paths(const loqec::TwoPhotonState& s, const loqec::LinearElement& e) {
    std::set<loqec::PathId> ps(s.paths().begin(), s.paths().end());
    ps.insert(e.outputs().begin(), e.outputs().end());
    return {ps.begin(), ps.end()};
}

inline loqec::Jones random_jones(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    loqec::Jones j{{g(rng), g(rng)}, {g(rng), g(rng)}};
    return loqec::Complex(1.0 / std::sqrt(j.norm_squared())) * j;
}

} // namespace gen
