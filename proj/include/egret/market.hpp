#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace egret {

// Raised when a posted-price round would break the mechanism rules
// (revisiting a client, selling an occupied instance). The action masking
// upstream must make this unreachable.
class mechanism_violation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Utility ties within this window count as "no improvement"; the client
// only buys on a strict gain.
inline constexpr double kDefaultBuyEpsilon = 1e-9;

// One client's task and cost parameters.
struct ClientProfile {
    double d = 0.0;      // task data size, Mb
    double f = 0.0;      // local computing capacity, Mb/s
    double b = 0.0;      // network bandwidth, Mb/s
    double mu = 0.0;     // energy dissipation coefficient
    double nu = 0.0;     // transmission cost coefficient
    double alpha = 0.0;  // energy weight
    double beta = 0.0;   // latency weight
    double gamma = 0.0;  // payment weight

    void validate() const {
        if (!(d > 0.0)) throw std::invalid_argument("ClientProfile: d must be > 0");
        if (!(f > 0.0)) throw std::invalid_argument("ClientProfile: f must be > 0");
        if (!(b > 0.0)) throw std::invalid_argument("ClientProfile: b must be > 0");
        if (mu < 0.0 || nu < 0.0) throw std::invalid_argument("ClientProfile: mu, nu must be >= 0");
        if (alpha < 0.0 || beta < 0.0 || gamma < 0.0)
            throw std::invalid_argument("ClientProfile: weights must be >= 0");
        if (alpha == 0.0 && beta == 0.0 && gamma == 0.0)
            throw std::invalid_argument("ClientProfile: at least one weight must be > 0");
    }
};

// The M instance capacities, strictly increasing, plus availability flags.
struct ResourceCatalog {
    std::vector<double> capacities;  // F_j, Mb/s
    std::vector<bool> available;

    explicit ResourceCatalog(std::vector<double> caps = {})
        : capacities(std::move(caps)), available(capacities.size(), true) {
        for (std::size_t j = 0; j < capacities.size(); ++j) {
            if (!(capacities[j] > 0.0))
                throw std::invalid_argument("ResourceCatalog: capacities must be > 0");
            if (j > 0 && !(capacities[j - 1] < capacities[j]))
                throw std::invalid_argument("ResourceCatalog: capacities must be strictly increasing");
        }
    }

    std::size_t size() const { return capacities.size(); }
};

// Per-instance unit prices. Unavailable instances carry an explicit flag
// rather than a non-finite float; `serialized_price` mirrors the flag as a
// very large finite value for file output.
struct PriceVector {
    std::vector<double> p;
    std::vector<bool> offered;  // false == priced out (infinite)

    PriceVector() = default;
    explicit PriceVector(std::size_t m) : p(m, 0.0), offered(m, false) {}
    PriceVector(std::vector<double> prices, std::vector<bool> mask)
        : p(std::move(prices)), offered(std::move(mask)) {
        if (p.size() != offered.size()) throw std::invalid_argument("PriceVector: size mismatch");
    }

    static PriceVector all_offered(std::vector<double> prices) {
        PriceVector pv;
        pv.offered.assign(prices.size(), true);
        pv.p = std::move(prices);
        return pv;
    }

    std::size_t size() const { return p.size(); }
    bool is_offered(std::size_t j) const { return offered[j] && std::isfinite(p[j]) && p[j] >= 0.0; }

    static constexpr double kUnavailableSentinel = 1e30;
    double serialized_price(std::size_t j) const { return offered[j] ? p[j] : kUnavailableSentinel; }
};

// The client's choice for one round.
struct BestResponse {
    std::optional<int> choice;  // instance index
    double x = 0.0;             // offloaded data, Mb
    double utility = 0.0;
    double payment = 0.0;

    bool purchased() const { return choice.has_value(); }
};

inline double local_latency(const ClientProfile& c, double x) { return (c.d - x) / c.f; }
inline double offload_latency(const ClientProfile& c, double x, double F) { return x / c.b + x / F; }
inline double energy_cost(const ClientProfile& c, double x) {
    return c.mu * (c.d - x) * c.f * c.f + c.nu * x / c.b;
}
inline double payment_for(double p, double x, double F) { return p * x / F; }

// Client utility: alpha*energy + beta*latency + gamma*payment.
inline double utility(const ClientProfile& c, double p, double x, double F) {
    if (!(F > 0.0)) throw std::invalid_argument("utility: F must be > 0");
    if (p < 0.0) throw std::invalid_argument("utility: price must be >= 0");
    if (x < 0.0 || x > c.d) throw std::domain_error("utility: x outside [0, d]");
    const double latency = std::max(local_latency(c, x), offload_latency(c, x, F));
    return c.alpha * energy_cost(c, x) + c.beta * latency + c.gamma * payment_for(p, x, F);
}

// Utility of doing everything locally; independent of any price.
inline double baseline_utility(const ClientProfile& c) {
    return c.alpha * c.mu * c.d * c.f * c.f + c.beta * c.d / c.f;
}

// Offload amount where local and remote latencies meet; the kink of the
// piecewise-linear utility. Strictly inside (0, d).
inline double breakpoint(const ClientProfile& c, double F) {
    if (!(F > 0.0)) throw std::invalid_argument("breakpoint: F must be > 0");
    return c.d * c.b * F / (c.b * F + c.f * F + c.f * c.b);
}

// Exact utility minimizer over all offered instances. The minimum of a
// piecewise-linear function sits at a vertex, so only x in {0, x_mid, d}
// need evaluation. Ties within eps_buy keep the no-purchase outcome; among
// purchases, larger x wins, then the lower instance index.
inline BestResponse best_response(const ClientProfile& c, const PriceVector& prices,
                                  const ResourceCatalog& catalog,
                                  double eps_buy = kDefaultBuyEpsilon) {
    if (prices.size() != catalog.size())
        throw std::invalid_argument("best_response: price/catalog size mismatch");

    BestResponse none;
    none.utility = baseline_utility(c);

    bool found = false;
    double best_u = 0.0, best_x = 0.0, best_p = 0.0;
    int best_j = -1;
    for (std::size_t j = 0; j < catalog.size(); ++j) {
        if (!catalog.available[j] || !prices.is_offered(j)) continue;
        const double F = catalog.capacities[j];
        const double p = prices.p[j];
        const double candidates[2] = {c.d, breakpoint(c, F)};
        for (double x : candidates) {
            const double u = utility(c, p, x, F);
            bool better = false;
            if (!found) {
                better = true;
            } else if (u < best_u - eps_buy) {
                better = true;
            } else if (u <= best_u + eps_buy) {
                better = x > best_x || (x == best_x && static_cast<int>(j) < best_j);
            }
            if (better) {
                found = true;
                best_u = u;
                best_x = x;
                best_p = p;
                best_j = static_cast<int>(j);
            }
        }
    }

    if (!found || !(best_u < none.utility - eps_buy)) return none;

    BestResponse r;
    r.choice = best_j;
    r.x = best_x;
    r.utility = best_u;
    r.payment = payment_for(best_p, best_x, catalog.capacities[static_cast<std::size_t>(best_j)]);
    return r;
}

// Per-round bookkeeping for one posted-price pass.
struct MarketState {
    std::vector<int> rho_client;          // 1 == not yet visited
    std::vector<int> rho_res;             // 1 == not yet rented
    std::vector<std::vector<int>> X;      // allocation, N x M
    std::vector<std::vector<double>> Y;   // payments, N x M

    MarketState() = default;
    MarketState(std::size_t n, std::size_t m)
        : rho_client(n, 1),
          rho_res(m, 1),
          X(n, std::vector<int>(m, 0)),
          Y(n, std::vector<double>(m, 0.0)) {}

    std::size_t num_clients() const { return rho_client.size(); }
    std::size_t num_instances() const { return rho_res.size(); }

    bool all_clients_visited() const {
        for (int v : rho_client)
            if (v) return false;
        return true;
    }
    bool all_resources_rented() const {
        for (int v : rho_res)
            if (v) return false;
        return true;
    }

    double total_payments() const {
        double total = 0.0;
        for (const auto& row : Y)
            for (double y : row) total += y;
        return total;
    }

    // Always-on structural checks: one instance per client, one client per
    // instance, payments only where allocated, occupancy mirrored in rho_res.
    void check_invariants() const {
        for (std::size_t i = 0; i < X.size(); ++i) {
            int row_sum = 0;
            for (std::size_t j = 0; j < X[i].size(); ++j) {
                row_sum += X[i][j];
                if (Y[i][j] != 0.0 && X[i][j] != 1)
                    throw mechanism_violation("MarketState: payment without allocation");
            }
            if (row_sum > 1) throw mechanism_violation("MarketState: client rented more than one instance");
        }
        for (std::size_t j = 0; j < rho_res.size(); ++j) {
            int col_sum = 0;
            for (std::size_t i = 0; i < X.size(); ++i) col_sum += X[i][j];
            if (col_sum > 1) throw mechanism_violation("MarketState: instance rented more than once");
            if (col_sum > 0 && rho_res[j] != 0)
                throw mechanism_violation("MarketState: rented instance still marked free");
        }
    }
};

// Applies one round's outcome: marks the client visited and, on a purchase,
// records allocation, payment, and instance occupancy. Returns the payment.
inline double apply_round(MarketState& state, std::size_t client, const PriceVector& prices,
                          const BestResponse& response) {
    if (client >= state.num_clients()) throw std::invalid_argument("apply_round: client out of range");
    if (!state.rho_client[client]) throw mechanism_violation("apply_round: client already visited");
    for (std::size_t j = 0; j < state.num_instances(); ++j) {
        if (!state.rho_res[j] && prices.is_offered(j))
            throw mechanism_violation("apply_round: rented instance was offered");
    }

    state.rho_client[client] = 0;
    double payment = 0.0;
    if (response.purchased()) {
        const auto j = static_cast<std::size_t>(*response.choice);
        if (j >= state.num_instances()) throw std::invalid_argument("apply_round: instance out of range");
        if (!state.rho_res[j]) throw mechanism_violation("apply_round: instance already rented");
        state.X[client][j] = 1;
        state.Y[client][j] = response.payment;
        state.rho_res[j] = 0;
        payment = response.payment;
    }
    state.check_invariants();
    return payment;
}

}  // namespace egret
