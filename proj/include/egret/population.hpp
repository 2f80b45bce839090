#pragma once

#include <stdexcept>
#include <vector>

#include "egret/market.hpp"
#include "egret/rng.hpp"

namespace egret {

// Distributions the synthetic client population is drawn from: data size
// normal, capacity and bandwidth uniform, cost coefficients and utility
// weights fixed.
struct PopulationSpec {
    int n_types = 5;
    double d_mean = 3.0;
    double d_std = 0.1;
    double f_min = 1.0;
    double f_max = 2.0;
    double b_min = 0.30;
    double b_max = 0.50;
    double mu = 1e-2;
    double nu = 1e-3;
    double alpha = 0.1;
    double beta = 1.0;
    double gamma = 1.0;

    void validate() const {
        if (n_types <= 0) throw std::invalid_argument("population.n_types: must be > 0");
        if (!(d_mean > 0.0)) throw std::invalid_argument("population.d_mean: must be > 0");
        if (d_std < 0.0) throw std::invalid_argument("population.d_std: must be >= 0");
        if (!(0.0 < f_min && f_min <= f_max)) throw std::invalid_argument("population.f: need 0 < f_min <= f_max");
        if (!(0.0 < b_min && b_min <= b_max)) throw std::invalid_argument("population.b: need 0 < b_min <= b_max");
    }
};

inline ClientProfile sample_client(const PopulationSpec& s, Rng& rng) {
    ClientProfile c;
    c.d = s.d_std > 0.0 ? rng.normal_positive(s.d_mean, s.d_std) : s.d_mean;
    c.f = rng.uniform(s.f_min, s.f_max);
    c.b = rng.uniform(s.b_min, s.b_max);
    c.mu = s.mu;
    c.nu = s.nu;
    c.alpha = s.alpha;
    c.beta = s.beta;
    c.gamma = s.gamma;
    c.validate();
    return c;
}

inline std::vector<ClientProfile> sample_population(const PopulationSpec& s, Rng& rng) {
    s.validate();
    std::vector<ClientProfile> clients;
    clients.reserve(static_cast<std::size_t>(s.n_types));
    for (int i = 0; i < s.n_types; ++i) clients.push_back(sample_client(s, rng));
    return clients;
}

// Resampling applied to a client each time it enters the environment:
// either the task size (d ~ N(unif(lo, hi), std)) or the bandwidth
// (b ~ N(mean, std) / 100), truncated to stay positive.
struct ClientPerturbation {
    enum class Mode { None, Data, Bandwidth };
    Mode mode = Mode::None;
    double data_mean_lo = 2.0;
    double data_mean_hi = 5.0;
    double data_std = 0.5;
    double bandwidth_mean = 40.0;  // divided by 100 after sampling
    double bandwidth_std = 5.0;

    bool active() const { return mode != Mode::None; }

    ClientProfile apply(const ClientProfile& base, Rng& rng) const {
        ClientProfile c = base;
        switch (mode) {
            case Mode::None:
                break;
            case Mode::Data: {
                const double mean = rng.uniform(data_mean_lo, data_mean_hi);
                c.d = data_std > 0.0 ? rng.normal_positive(mean, data_std) : mean;
                break;
            }
            case Mode::Bandwidth: {
                c.b = bandwidth_std > 0.0 ? rng.normal_positive(bandwidth_mean, bandwidth_std) / 100.0
                                          : bandwidth_mean / 100.0;
                break;
            }
        }
        return c;
    }
};

inline std::vector<ClientProfile> perturb_clients(const std::vector<ClientProfile>& clients,
                                                  const ClientPerturbation& pert, Rng& rng) {
    std::vector<ClientProfile> out;
    out.reserve(clients.size());
    for (const auto& c : clients) out.push_back(pert.apply(c, rng));
    return out;
}

}  // namespace egret
