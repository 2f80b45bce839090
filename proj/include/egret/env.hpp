#pragma once

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "egret/market.hpp"
#include "egret/oracle.hpp"
#include "egret/population.hpp"
#include "egret/rng.hpp"

namespace egret {

using Observation = std::vector<double>;

// Optimized view feeds only the rows of X and Y touched by the last step;
// the full view flattens both matrices.
enum class ObsView { Optimized, Full };

inline std::size_t observation_size(ObsView view, std::size_t n, std::size_t m) {
    return view == ObsView::Optimized ? n + 3 * m : n + m + 2 * n * m;
}

struct StepResult {
    Observation obs;
    double reward = 0.0;
    bool done = false;
};

namespace detail {

inline Observation build_observation(ObsView view, const MarketState& ms, int changed_row) {
    Observation obs;
    const std::size_t n = ms.num_clients(), m = ms.num_instances();
    obs.reserve(observation_size(view, n, m));
    for (int v : ms.rho_client) obs.push_back(static_cast<double>(v));
    for (int v : ms.rho_res) obs.push_back(static_cast<double>(v));
    if (view == ObsView::Optimized) {
        for (std::size_t j = 0; j < m; ++j)
            obs.push_back(changed_row >= 0 ? static_cast<double>(ms.X[static_cast<std::size_t>(changed_row)][j]) : 0.0);
        for (std::size_t j = 0; j < m; ++j)
            obs.push_back(changed_row >= 0 ? ms.Y[static_cast<std::size_t>(changed_row)][j] : 0.0);
    } else {
        for (const auto& row : ms.X)
            for (int v : row) obs.push_back(static_cast<double>(v));
        for (const auto& row : ms.Y)
            for (double v : row) obs.push_back(v);
    }
    return obs;
}

inline PriceVector offered_prices(const std::vector<double>& prices, const std::vector<int>& rho_res) {
    if (prices.size() != rho_res.size()) throw std::invalid_argument("step: price vector size mismatch");
    PriceVector pv(prices.size());
    for (std::size_t j = 0; j < prices.size(); ++j) {
        pv.p[j] = prices[j];
        pv.offered[j] = rho_res[j] == 1;
    }
    return pv;
}

}  // namespace detail

// One posted-price pass over a static client set. Deterministic; the seed
// only tags the episode.
class ScomEnv {
public:
    ScomEnv(std::vector<ClientProfile> clients, ResourceCatalog catalog,
            ObsView view = ObsView::Optimized, double eps_buy = kDefaultBuyEpsilon)
        : clients_(std::move(clients)), catalog_(std::move(catalog)), view_(view), eps_buy_(eps_buy) {}

    Observation reset(std::uint64_t /*seed*/ = 0) {
        state_ = MarketState(clients_.size(), catalog_.size());
        changed_row_ = -1;
        done_ = state_.all_clients_visited() || state_.all_resources_rented();
        return obs();
    }

    StepResult step(int client, const std::vector<double>& prices) {
        if (done_) throw std::logic_error("ScomEnv::step: episode already terminated");
        if (client < 0 || static_cast<std::size_t>(client) >= clients_.size())
            throw std::invalid_argument("ScomEnv::step: client out of range");
        if (!state_.rho_client[static_cast<std::size_t>(client)])
            throw mechanism_violation("ScomEnv::step: masked client sampled");

        const PriceVector pv = detail::offered_prices(prices, state_.rho_res);
        const BestResponse br =
            best_response(clients_[static_cast<std::size_t>(client)], pv, catalog_, eps_buy_);
        const double payment = apply_round(state_, static_cast<std::size_t>(client), pv, br);
        changed_row_ = client;
        last_response_ = br;
        done_ = state_.all_clients_visited() || state_.all_resources_rented();
        return {obs(), payment, done_};
    }

    Observation obs() const { return detail::build_observation(view_, state_, changed_row_); }
    const std::vector<int>& client_mask() const { return state_.rho_client; }
    bool done() const { return done_; }
    double revenue() const { return state_.total_payments(); }

    std::size_t num_clients() const { return clients_.size(); }
    std::size_t num_instances() const { return catalog_.size(); }
    ObsView view() const { return view_; }
    const std::vector<ClientProfile>& clients() const { return clients_; }
    const ResourceCatalog& catalog() const { return catalog_; }
    const MarketState& market_state() const { return state_; }
    const BestResponse& last_response() const { return last_response_; }

private:
    std::vector<ClientProfile> clients_;
    ResourceCatalog catalog_;
    ObsView view_;
    double eps_buy_;
    MarketState state_;
    BestResponse last_response_;
    int changed_row_ = -1;
    bool done_ = true;
};

// Which client types enter at each interval; entries are distinct within
// an interval.
struct ArrivalTrace {
    std::vector<std::vector<int>> intervals;

    std::size_t length() const { return intervals.size(); }

    std::string to_text() const {
        std::ostringstream out;
        for (std::size_t k = 0; k < intervals.size(); ++k) {
            out << k << ':';
            for (std::size_t i = 0; i < intervals[k].size(); ++i) {
                out << (i ? "," : " ") << intervals[k][i];
            }
            out << '\n';
        }
        return out.str();
    }

    static ArrivalTrace from_text(const std::string& text) {
        ArrivalTrace trace;
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto colon = line.find(':');
            if (colon == std::string::npos)
                throw std::runtime_error("ArrivalTrace: malformed line '" + line + "'");
            const std::size_t index = std::stoul(line.substr(0, colon));
            if (index != trace.intervals.size())
                throw std::runtime_error("ArrivalTrace: interval indices must be consecutive");
            std::vector<int> entries;
            std::string rest = line.substr(colon + 1);
            std::istringstream items(rest);
            std::string item;
            while (std::getline(items, item, ',')) {
                if (item.find_first_not_of(" \t") == std::string::npos) continue;
                entries.push_back(std::stoi(item));
            }
            trace.intervals.push_back(std::move(entries));
        }
        return trace;
    }
};

// Per-interval arrival count distribution.
struct ArrivalSpec {
    enum class Mode { Uniform, Poisson };
    Mode mode = Mode::Uniform;
    int max_clients = 20;  // uniform mode: count ~ U{0..min(max_clients, N)}
    double lambda = 3.0;   // poisson mode: count ~ Poisson(lambda) | count <= N
};

inline ArrivalTrace gen_trace(Rng& rng, int length, int n_types, const ArrivalSpec& spec) {
    ArrivalTrace trace;
    trace.intervals.reserve(static_cast<std::size_t>(length));
    for (int k = 0; k < length; ++k) {
        int count = 0;
        if (spec.mode == ArrivalSpec::Mode::Uniform) {
            count = static_cast<int>(rng.uniform_int(0, std::min(spec.max_clients, n_types)));
        } else {
            count = rng.poisson_truncated(spec.lambda, n_types);
        }
        trace.intervals.push_back(rng.sample_distinct(n_types, count, /*sorted=*/true));
    }
    return trace;
}

inline std::vector<ArrivalTrace> gen_traces(int n_traces, int length, int n_types,
                                            const ArrivalSpec& spec, std::uint64_t seed) {
    std::vector<ArrivalTrace> traces;
    traces.reserve(static_cast<std::size_t>(n_traces));
    for (int t = 0; t < n_traces; ++t) {
        Rng rng = named_rng(seed, "traces", static_cast<std::uint64_t>(t));
        traces.push_back(gen_trace(rng, length, n_types, spec));
    }
    return traces;
}

// Busy window of one instance, for occupancy audits.
struct OccupancyRecord {
    int instance = 0;
    double start = 0.0;       // purchase time
    double completion = 0.0;  // start + offload latency
    double freed = -1.0;      // interval boundary when recycled, -1 while busy
};

// Batched arrivals with resource recycling: clients wait one interval, a
// posted-price pass runs over the waiting set and free instances, then time
// advances and finished instances are recycled. Unserved clients leave.
class DscomEnv {
public:
    DscomEnv(std::vector<ClientProfile> base_clients, ResourceCatalog catalog,
             double interval_seconds = 3.0, ClientPerturbation perturbation = {},
             ObsView view = ObsView::Optimized, double eps_buy = kDefaultBuyEpsilon)
        : base_clients_(std::move(base_clients)),
          catalog_(std::move(catalog)),
          interval_seconds_(interval_seconds),
          perturbation_(perturbation),
          view_(view),
          eps_buy_(eps_buy),
          active_(base_clients_) {
        if (!(interval_seconds_ > 0.0)) throw std::invalid_argument("DscomEnv: interval must be > 0");
    }

    Observation reset(const ArrivalTrace& trace, std::uint64_t seed) {
        trace_ = trace;
        rng_ = named_rng(seed, "env");
        interval_ = -1;
        now_ = 0.0;
        busy_.assign(catalog_.size(), false);
        completion_.assign(catalog_.size(), 0.0);
        active_ = base_clients_;
        state_ = MarketState(base_clients_.size(), catalog_.size());
        std::fill(state_.rho_client.begin(), state_.rho_client.end(), 0);
        changed_row_ = -1;
        done_ = false;
        revenue_ = 0.0;
        interval_revenue_.clear();
        occupancy_log_.clear();
        advance_to_playable_interval();
        return obs();
    }

    StepResult step(int client, const std::vector<double>& prices) {
        if (done_) throw std::logic_error("DscomEnv::step: episode already terminated");
        if (client < 0 || static_cast<std::size_t>(client) >= base_clients_.size())
            throw std::invalid_argument("DscomEnv::step: client out of range");
        if (!state_.rho_client[static_cast<std::size_t>(client)])
            throw mechanism_violation("DscomEnv::step: masked client sampled");

        const PriceVector pv = detail::offered_prices(prices, state_.rho_res);
        const BestResponse br =
            best_response(active_[static_cast<std::size_t>(client)], pv, catalog_, eps_buy_);
        const double payment = apply_round(state_, static_cast<std::size_t>(client), pv, br);
        changed_row_ = client;
        if (br.purchased()) {
            const auto j = static_cast<std::size_t>(*br.choice);
            if (busy_[j]) throw mechanism_violation("DscomEnv::step: sold an occupied instance");
            const ClientProfile& c = active_[static_cast<std::size_t>(client)];
            busy_[j] = true;
            completion_[j] = now_ + offload_latency(c, br.x, catalog_.capacities[j]);
            occupancy_log_.push_back({*br.choice, now_, completion_[j], -1.0});
        }
        revenue_ += payment;
        interval_revenue_.back() += payment;

        if (interval_pass_finished()) advance_to_playable_interval();
        return {obs(), payment, done_};
    }

    Observation obs() const { return detail::build_observation(view_, state_, changed_row_); }
    const std::vector<int>& client_mask() const { return state_.rho_client; }
    bool done() const { return done_; }
    double revenue() const { return revenue_; }
    const std::vector<double>& interval_revenue() const { return interval_revenue_; }

    std::size_t num_clients() const { return base_clients_.size(); }
    std::size_t num_instances() const { return catalog_.size(); }
    ObsView view() const { return view_; }
    const ResourceCatalog& catalog() const { return catalog_; }
    const MarketState& market_state() const { return state_; }
    // Profile currently attached to a waiting client type (perturbed copy).
    const ClientProfile& active_profile(int type) const { return active_[static_cast<std::size_t>(type)]; }
    const std::vector<bool>& busy() const { return busy_; }
    int current_interval() const { return interval_; }
    double now() const { return now_; }
    const std::vector<OccupancyRecord>& occupancy_log() const { return occupancy_log_; }

private:
    bool interval_pass_finished() const {
        return state_.all_clients_visited() || state_.all_resources_rented();
    }

    bool playable() const {
        bool any_waiting = false;
        for (int v : state_.rho_client) any_waiting |= v == 1;
        bool any_free = false;
        for (int v : state_.rho_res) any_free |= v == 1;
        return any_waiting && any_free;
    }

    // Move to the next interval with at least one waiting client and one
    // free instance; recycle instances whose work finished by the boundary.
    void advance_to_playable_interval() {
        for (;;) {
            ++interval_;
            if (interval_ >= static_cast<int>(trace_.length())) {
                done_ = true;
                return;
            }
            now_ = interval_seconds_ * static_cast<double>(interval_);
            for (std::size_t j = 0; j < busy_.size(); ++j) {
                if (busy_[j] && completion_[j] <= now_) {
                    busy_[j] = false;
                    for (auto it = occupancy_log_.rbegin(); it != occupancy_log_.rend(); ++it) {
                        if (it->instance == static_cast<int>(j) && it->freed < 0.0) {
                            it->freed = now_;
                            break;
                        }
                    }
                }
            }
            state_ = MarketState(base_clients_.size(), catalog_.size());
            std::fill(state_.rho_client.begin(), state_.rho_client.end(), 0);
            for (int type : trace_.intervals[static_cast<std::size_t>(interval_)]) {
                if (type < 0 || static_cast<std::size_t>(type) >= base_clients_.size())
                    throw std::invalid_argument("DscomEnv: trace references unknown client type");
                state_.rho_client[static_cast<std::size_t>(type)] = 1;
                active_[static_cast<std::size_t>(type)] =
                    perturbation_.apply(base_clients_[static_cast<std::size_t>(type)], rng_);
            }
            for (std::size_t j = 0; j < busy_.size(); ++j) state_.rho_res[j] = busy_[j] ? 0 : 1;
            changed_row_ = -1;
            interval_revenue_.push_back(0.0);
            if (playable()) return;
        }
    }

    std::vector<ClientProfile> base_clients_;
    ResourceCatalog catalog_;
    double interval_seconds_;
    ClientPerturbation perturbation_;
    ObsView view_;
    double eps_buy_;

    ArrivalTrace trace_;
    Rng rng_;
    int interval_ = -1;
    double now_ = 0.0;
    std::vector<bool> busy_;
    std::vector<double> completion_;
    std::vector<ClientProfile> active_;
    MarketState state_;
    int changed_row_ = -1;
    bool done_ = true;
    double revenue_ = 0.0;
    std::vector<double> interval_revenue_;
    std::vector<OccupancyRecord> occupancy_log_;
};

}  // namespace egret
