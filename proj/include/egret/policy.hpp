#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "egret/env.hpp"
#include "egret/mlp.hpp"
#include "egret/rng.hpp"

namespace egret {

// Welford running mean/variance, one slot per dimension. Statistics are
// updated only while training; evaluation runs on frozen values.
class RunningStats {
public:
    RunningStats() = default;
    explicit RunningStats(std::size_t dim) : mean_(dim, 0.0), m2_(dim, 0.0) {}

    void update(const std::vector<double>& x) {
        if (x.size() != mean_.size()) throw std::invalid_argument("RunningStats: dimension mismatch");
        ++count_;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double delta = x[i] - mean_[i];
            mean_[i] += delta / static_cast<double>(count_);
            m2_[i] += delta * (x[i] - mean_[i]);
        }
    }

    double variance(std::size_t i) const {
        return count_ > 0 ? m2_[i] / static_cast<double>(count_) : 1.0;
    }

    // (x - mean) / std, clipped to +-10 to bound outliers early in training.
    double normalize_value(std::size_t i, double x, bool center = true) const {
        if (count_ < 2) return center ? 0.0 : x;
        const double scaled = (x - (center ? mean_[i] : 0.0)) / std::sqrt(variance(i) + 1e-8);
        return std::clamp(scaled, -10.0, 10.0);
    }

    std::vector<double> normalize(const std::vector<double>& x, bool center = true) const {
        std::vector<double> out(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = normalize_value(i, x[i], center);
        return out;
    }

    long long count() const { return count_; }
    const std::vector<double>& mean() const { return mean_; }
    const std::vector<double>& m2() const { return m2_; }
    void restore(long long count, std::vector<double> mean, std::vector<double> m2) {
        count_ = count;
        mean_ = std::move(mean);
        m2_ = std::move(m2);
    }

private:
    long long count_ = 0;
    std::vector<double> mean_, m2_;
};

// Visited-client index plus the raw (unsorted, untransformed) price draws.
struct CompositeAction {
    int client = -1;
    std::vector<double> prices;
};

enum class PolicyKind { Egret, EgretN, Rop, Rpp, DeepSpm, BEgret };

inline std::string to_string(PolicyKind k) {
    switch (k) {
        case PolicyKind::Egret: return "egret";
        case PolicyKind::EgretN: return "egret_n";
        case PolicyKind::Rop: return "rop";
        case PolicyKind::Rpp: return "rpp";
        case PolicyKind::DeepSpm: return "deep_spm";
        case PolicyKind::BEgret: return "b_egret";
    }
    throw std::logic_error("unknown PolicyKind");
}

inline PolicyKind policy_kind_from(const std::string& s) {
    if (s == "egret") return PolicyKind::Egret;
    if (s == "egret_n") return PolicyKind::EgretN;
    if (s == "rop") return PolicyKind::Rop;
    if (s == "rpp") return PolicyKind::Rpp;
    if (s == "deep_spm") return PolicyKind::DeepSpm;
    if (s == "b_egret") return PolicyKind::BEgret;
    throw std::invalid_argument("unknown policy kind '" + s + "'");
}

inline bool learns_client_head(PolicyKind k) { return k != PolicyKind::Rop; }
inline bool learns_price_head(PolicyKind k) { return k != PolicyKind::Rpp; }
inline bool ranks_prices(PolicyKind k) { return k != PolicyKind::EgretN; }
inline ObsView obs_view_for(PolicyKind k) {
    return k == PolicyKind::BEgret ? ObsView::Full : ObsView::Optimized;
}

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

// Sorts the posted prices ascending so price aligns with capacity. The raw
// action (and therefore its stored log-probability) is left untouched.
inline std::vector<double> rank_prices(std::vector<double> prices) {
    std::sort(prices.begin(), prices.end());
    return prices;
}

inline CompositeAction rank_prices(CompositeAction a) {
    a.prices = rank_prices(std::move(a.prices));
    return a;
}

// Log-probability, entropy, and their derivatives w.r.t. the actor outputs
// and the price log-std parameters, for one (state, raw action) pair.
struct DistEval {
    double log_prob = 0.0;
    double entropy = 0.0;
    std::vector<double> dlp_dout;       // size n + m
    std::vector<double> dent_dout;      // size n + m
    std::vector<double> dlp_dlogstd;    // size m
    std::vector<double> dent_dlogstd;   // size m
};

inline DistEval eval_action_dist(PolicyKind kind, int n, int m, const std::vector<double>& actor_out,
                                 const std::vector<double>& log_std, const std::vector<int>& mask,
                                 const CompositeAction& action) {
    if (static_cast<int>(actor_out.size()) != n + m)
        throw std::invalid_argument("eval_action_dist: actor output size mismatch");
    DistEval ev;
    ev.dlp_dout.assign(static_cast<std::size_t>(n + m), 0.0);
    ev.dent_dout.assign(static_cast<std::size_t>(n + m), 0.0);
    ev.dlp_dlogstd.assign(static_cast<std::size_t>(m), 0.0);
    ev.dent_dlogstd.assign(static_cast<std::size_t>(m), 0.0);

    if (learns_client_head(kind)) {
        // Masked softmax over the first n outputs.
        double zmax = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i)
            if (mask[static_cast<std::size_t>(i)]) zmax = std::max(zmax, actor_out[static_cast<std::size_t>(i)]);
        if (!std::isfinite(zmax)) throw mechanism_violation("eval_action_dist: empty client mask");
        double denom = 0.0;
        for (int i = 0; i < n; ++i)
            if (mask[static_cast<std::size_t>(i)]) denom += std::exp(actor_out[static_cast<std::size_t>(i)] - zmax);
        const double lse = zmax + std::log(denom);
        if (!mask[static_cast<std::size_t>(action.client)])
            throw mechanism_violation("eval_action_dist: action selects masked client");
        ev.log_prob += actor_out[static_cast<std::size_t>(action.client)] - lse;

        double cat_entropy = 0.0;
        std::vector<double> probs(static_cast<std::size_t>(n), 0.0);
        for (int i = 0; i < n; ++i) {
            if (!mask[static_cast<std::size_t>(i)]) continue;
            const double lp = actor_out[static_cast<std::size_t>(i)] - lse;
            probs[static_cast<std::size_t>(i)] = std::exp(lp);
            cat_entropy -= probs[static_cast<std::size_t>(i)] * lp;
        }
        ev.entropy += cat_entropy;
        for (int i = 0; i < n; ++i) {
            if (!mask[static_cast<std::size_t>(i)]) continue;
            const double p = probs[static_cast<std::size_t>(i)];
            ev.dlp_dout[static_cast<std::size_t>(i)] = (i == action.client ? 1.0 : 0.0) - p;
            const double logp = actor_out[static_cast<std::size_t>(i)] - lse;
            ev.dent_dout[static_cast<std::size_t>(i)] = -p * (logp + cat_entropy);
        }
    }

    if (learns_price_head(kind)) {
        if (static_cast<int>(action.prices.size()) != m)
            throw std::invalid_argument("eval_action_dist: price vector size mismatch");
        constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5*log(2*pi)
        for (int j = 0; j < m; ++j) {
            const double ls = std::clamp(log_std[static_cast<std::size_t>(j)], kLogStdMin, kLogStdMax);
            const double sigma = std::exp(ls);
            const double mean = actor_out[static_cast<std::size_t>(n + j)];
            const double u = (action.prices[static_cast<std::size_t>(j)] - mean) / sigma;
            ev.log_prob += -0.5 * u * u - ls - kHalfLog2Pi;
            ev.entropy += 0.5 + kHalfLog2Pi + ls;
            ev.dlp_dout[static_cast<std::size_t>(n + j)] = u / sigma;
            ev.dlp_dlogstd[static_cast<std::size_t>(j)] = u * u - 1.0;
            ev.dent_dlogstd[static_cast<std::size_t>(j)] = 1.0;
        }
    }

    return ev;
}

// The Egret agent and its ablations: actor/critic perceptrons, a learnable
// per-instance price log-std, and the observation/reward normalizers.
struct Policy {
    PolicyKind kind = PolicyKind::Egret;
    int n = 0;
    int m = 0;
    ObsView view = ObsView::Optimized;
    Mlp actor;
    Mlp critic;
    std::vector<double> log_std;
    RunningStats obs_stats;
    RunningStats rew_stats;
    double price_scale = 10.0;
    double rpp_price_max = 40.0;

    static Policy create(PolicyKind kind, int n, int m, const std::vector<int>& hidden,
                         std::uint64_t seed, double price_scale = 10.0, double rpp_price_max = 40.0,
                         double logstd_init = 0.0) {
        Policy p;
        p.kind = kind;
        p.n = n;
        p.m = m;
        p.view = obs_view_for(kind);
        const int obs_dim = static_cast<int>(observation_size(p.view, static_cast<std::size_t>(n),
                                                              static_cast<std::size_t>(m)));
        Rng rng = named_rng(seed, "policy-init");
        std::vector<int> actor_dims = {obs_dim};
        actor_dims.insert(actor_dims.end(), hidden.begin(), hidden.end());
        actor_dims.push_back(n + m);
        std::vector<int> critic_dims = {obs_dim};
        critic_dims.insert(critic_dims.end(), hidden.begin(), hidden.end());
        critic_dims.push_back(1);
        p.actor = Mlp(actor_dims, rng, 0.01);
        p.critic = Mlp(critic_dims, rng, 1.0);
        p.log_std.assign(static_cast<std::size_t>(m), std::clamp(logstd_init, kLogStdMin, kLogStdMax));
        p.obs_stats = RunningStats(static_cast<std::size_t>(obs_dim));
        p.rew_stats = RunningStats(1);
        p.price_scale = price_scale;
        p.rpp_price_max = rpp_price_max;
        return p;
    }

    std::size_t obs_dim() const {
        return observation_size(view, static_cast<std::size_t>(n), static_cast<std::size_t>(m));
    }

    // Raw Gaussian draws can be negative; posted prices go through a
    // softplus and a fixed scale. Log-probabilities always refer to the raw
    // values, so this transform never touches training.
    std::vector<double> posted_prices(const std::vector<double>& raw) const {
        std::vector<double> posted(raw.size());
        if (kind == PolicyKind::Rpp) {
            posted = raw;  // RPP draws posted prices directly
        } else {
            for (std::size_t j = 0; j < raw.size(); ++j) {
                const double x = raw[j];
                const double sp = x > 30.0 ? x : std::log1p(std::exp(x));
                posted[j] = price_scale * sp;
            }
        }
        if (ranks_prices(kind)) posted = rank_prices(std::move(posted));
        return posted;
    }

    double value(const std::vector<double>& obs_norm) const {
        return critic.forward(obs_norm)[0];
    }

    // Sample the composite action. The returned prices are raw; callers post
    // `posted_prices(raw)` to the environment.
    std::pair<CompositeAction, double> sample(const std::vector<double>& obs_norm,
                                              const std::vector<int>& mask, Rng& rng) const {
        const std::vector<double> out = actor.forward(obs_norm);
        CompositeAction action;
        action.prices.resize(static_cast<std::size_t>(m));

        if (learns_client_head(kind)) {
            action.client = sample_masked_categorical(out, mask, rng);
        } else {
            action.client = sample_uniform_masked(mask, rng);
        }

        if (learns_price_head(kind)) {
            for (int j = 0; j < m; ++j) {
                const double ls = std::clamp(log_std[static_cast<std::size_t>(j)], kLogStdMin, kLogStdMax);
                action.prices[static_cast<std::size_t>(j)] =
                    rng.normal(out[static_cast<std::size_t>(n + j)], std::exp(ls));
            }
        } else {
            for (int j = 0; j < m; ++j)
                action.prices[static_cast<std::size_t>(j)] = rng.uniform(0.0, rpp_price_max);
        }

        const DistEval ev = eval_action_dist(kind, n, m, out, log_std, mask, action);
        return {action, ev.log_prob};
    }

    // Deterministic heads use their mode (argmax client, mean prices); the
    // random-by-design heads of ROP/RPP still draw from rng.
    CompositeAction greedy(const std::vector<double>& obs_norm, const std::vector<int>& mask,
                           Rng& rng) const {
        const std::vector<double> out = actor.forward(obs_norm);
        CompositeAction action;
        action.prices.resize(static_cast<std::size_t>(m));
        if (learns_client_head(kind)) {
            int best = -1;
            for (int i = 0; i < n; ++i) {
                if (!mask[static_cast<std::size_t>(i)]) continue;
                if (best < 0 || out[static_cast<std::size_t>(i)] > out[static_cast<std::size_t>(best)]) best = i;
            }
            if (best < 0) throw mechanism_violation("greedy: empty client mask");
            action.client = best;
        } else {
            action.client = sample_uniform_masked(mask, rng);
        }
        if (learns_price_head(kind)) {
            for (int j = 0; j < m; ++j) action.prices[static_cast<std::size_t>(j)] = out[static_cast<std::size_t>(n + j)];
        } else {
            for (int j = 0; j < m; ++j) action.prices[static_cast<std::size_t>(j)] = rng.uniform(0.0, rpp_price_max);
        }
        return action;
    }

    static int sample_uniform_masked(const std::vector<int>& mask, Rng& rng) {
        int count = 0;
        for (int v : mask) count += v ? 1 : 0;
        if (count == 0) throw mechanism_violation("sample: empty client mask");
        int pick = static_cast<int>(rng.uniform_int(0, count - 1));
        for (std::size_t i = 0; i < mask.size(); ++i) {
            if (!mask[i]) continue;
            if (pick-- == 0) return static_cast<int>(i);
        }
        throw std::logic_error("sample_uniform_masked: unreachable");
    }

    static int sample_masked_categorical(const std::vector<double>& out, const std::vector<int>& mask,
                                         Rng& rng) {
        double zmax = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < mask.size(); ++i)
            if (mask[i]) zmax = std::max(zmax, out[i]);
        if (!std::isfinite(zmax)) throw mechanism_violation("sample: empty client mask");
        double denom = 0.0;
        for (std::size_t i = 0; i < mask.size(); ++i)
            if (mask[i]) denom += std::exp(out[i] - zmax);
        const double u = rng.uniform01() * denom;
        double acc = 0.0;
        int last_valid = -1;
        for (std::size_t i = 0; i < mask.size(); ++i) {
            if (!mask[i]) continue;
            last_valid = static_cast<int>(i);
            acc += std::exp(out[i] - zmax);
            if (u < acc) return last_valid;
        }
        return last_valid;  // numerical tail
    }
};

}  // namespace egret
