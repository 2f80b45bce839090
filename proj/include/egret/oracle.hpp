#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "egret/market.hpp"

namespace egret {

// Posted prices are discounted by this much below the indifference price so
// the client strictly prefers to buy; planned revenue is still reported at
// the undiscounted price.
inline constexpr double kDefaultPostDiscount = 1e-6;

enum class PricingRule {
    MaxPrice,    // p* = max(p_a, p_b)
    MaxRevenue,  // argmax of p * x(p) / F over candidate and grid prices
};

// Outcome of pricing one (client, instance) pair.
struct MaxPriceResult {
    double p_star = 0.0;   // indifference price, clamped at 0
    double x_at = 0.0;     // quantity the client buys just below p_star
    double payment = 0.0;  // p_star * x_at / F
    bool priceable = true; // false when gamma == 0
    bool sellable = true;  // false when no positive price induces a purchase
};

// Solves U_mid(p) = U_ini and U_end(p) = U_ini in closed form and returns
// the larger root. The client buys the breakpoint quantity when p_a wins
// and the full task when p_b wins.
inline MaxPriceResult max_price(const ClientProfile& c, double F) {
    if (!(F > 0.0)) throw std::invalid_argument("max_price: F must be > 0");
    MaxPriceResult r;
    if (c.gamma == 0.0) {
        r.priceable = false;
        r.sellable = false;
        return r;
    }
    const double p_a = (F / c.gamma) * (c.alpha * c.mu * c.f * c.f - c.alpha * c.nu / c.b + c.beta / c.f);
    const double p_b = (F / c.gamma) * (c.beta / c.f + c.alpha * c.mu * c.f * c.f - (c.alpha * c.nu + c.beta) / c.b)
                       - c.beta / c.gamma;
    const double best = std::max(p_a, p_b);
    if (!(best > 0.0)) {
        r.sellable = false;
        return r;
    }
    r.p_star = best;
    r.x_at = (p_b >= p_a) ? c.d : breakpoint(c, F);
    r.payment = payment_for(r.p_star, r.x_at, F);
    return r;
}

// Revenue-maximizing variant: the revenue p*x(p)/F need not peak at the
// price maximum, so compare both closed-form candidates and a fine grid of
// posted prices below p*.
inline MaxPriceResult max_price_revenue(const ClientProfile& c, double F,
                                        double delta_post = kDefaultPostDiscount,
                                        int grid_points = 512,
                                        double eps_buy = kDefaultBuyEpsilon) {
    MaxPriceResult base = max_price(c, F);
    if (!base.priceable || !base.sellable) return base;

    ResourceCatalog single({F});
    auto revenue_at = [&](double posted) -> std::pair<double, double> {
        if (posted < 0.0) return {0.0, 0.0};
        PriceVector pv = PriceVector::all_offered({posted});
        BestResponse br = best_response(c, pv, single, eps_buy);
        return {br.payment, br.x};
    };

    double best_posted = base.p_star - delta_post;
    auto [best_rev, best_x] = revenue_at(best_posted);
    for (int k = 1; k <= grid_points; ++k) {
        const double posted = base.p_star * static_cast<double>(k) / grid_points - delta_post;
        auto [rev, x] = revenue_at(posted);
        if (rev > best_rev) {
            best_rev = rev;
            best_x = x;
            best_posted = posted;
        }
    }
    MaxPriceResult r;
    r.p_star = best_posted + delta_post;
    r.x_at = best_x;
    r.payment = payment_for(r.p_star, r.x_at, F);
    r.sellable = best_rev > 0.0;
    return r;
}

// Full-information tables: the maximum extractable payment tau[i][j]
// together with the prices and quantities that achieve it.
struct OracleTables {
    std::vector<std::vector<double>> tau;     // N x M payments
    std::vector<std::vector<double>> p_star;  // N x M prices
    std::vector<std::vector<double>> x_at;    // N x M quantities
    std::vector<std::vector<bool>> sellable;  // N x M

    std::size_t num_clients() const { return tau.size(); }
    std::size_t num_instances() const { return tau.empty() ? 0 : tau[0].size(); }
};

inline OracleTables payment_matrix(const std::vector<ClientProfile>& clients,
                                   const ResourceCatalog& catalog,
                                   PricingRule rule = PricingRule::MaxPrice,
                                   double delta_post = kDefaultPostDiscount) {
    const std::size_t n = clients.size(), m = catalog.size();
    OracleTables t;
    t.tau.assign(n, std::vector<double>(m, 0.0));
    t.p_star.assign(n, std::vector<double>(m, 0.0));
    t.x_at.assign(n, std::vector<double>(m, 0.0));
    t.sellable.assign(n, std::vector<bool>(m, false));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (!catalog.available[j]) continue;
            const MaxPriceResult r = rule == PricingRule::MaxPrice
                                         ? max_price(clients[i], catalog.capacities[j])
                                         : max_price_revenue(clients[i], catalog.capacities[j], delta_post);
            if (!r.priceable || !r.sellable) continue;
            t.tau[i][j] = r.payment;
            t.p_star[i][j] = r.p_star;
            t.x_at[i][j] = r.x_at;
            t.sellable[i][j] = true;
        }
    }
    return t;
}

struct PlanVisit {
    int round = 0;
    int client = 0;
    int instance = 0;
    double posted_price = 0.0;  // discounted price actually offered
    double payment = 0.0;       // planned payment at the undiscounted price
};

// Ordered visiting plan with the full price row posted at each round.
struct PricePlan {
    std::vector<PlanVisit> visits;
    std::vector<PriceVector> posted;  // one row per visit
    double expected_revenue = 0.0;

    std::vector<int> trace() const {
        std::vector<int> t;
        t.reserve(visits.size());
        for (const auto& v : visits) t.push_back(v.client);
        return t;
    }
};

namespace detail {

using Selection = std::vector<std::pair<int, int>>;  // (client, instance) in visit order

// Greedy argmax selection: repeatedly take the largest remaining entry,
// then zero its row and column. Ties resolve to the lowest row index, then
// the lowest column index.
inline Selection greedy_select(std::vector<std::vector<double>> tau) {
    const std::size_t n = tau.size();
    const std::size_t m = n ? tau[0].size() : 0;
    Selection picks;
    const std::size_t rounds = std::min(n, m);
    for (std::size_t k = 0; k < rounds; ++k) {
        int best_i = -1, best_j = -1;
        double best = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j)
                if (tau[i][j] > best) {
                    best = tau[i][j];
                    best_i = static_cast<int>(i);
                    best_j = static_cast<int>(j);
                }
        if (best_i < 0) break;  // nothing sellable remains
        picks.emplace_back(best_i, best_j);
        for (std::size_t j = 0; j < m; ++j) tau[static_cast<std::size_t>(best_i)][j] = 0.0;
        for (std::size_t i = 0; i < n; ++i) tau[i][static_cast<std::size_t>(best_j)] = 0.0;
    }
    return picks;
}

// Maximum-weight bipartite assignment by dynamic programming over subsets
// of the smaller side. Visits are ordered by decreasing payment.
inline Selection exact_select(const std::vector<std::vector<double>>& tau) {
    const int n = static_cast<int>(tau.size());
    const int m = n ? static_cast<int>(tau[0].size()) : 0;
    if (n == 0 || m == 0) return {};
    if (std::min(n, m) > 10)
        throw std::length_error("exact_plan: instance too large for exact assignment, use greedy_plan");

    const bool transpose = m > n;  // mask the smaller side
    const int rows = transpose ? m : n;
    const int cols = transpose ? n : m;
    auto at = [&](int r, int c) { return transpose ? tau[c][r] : tau[r][c]; };

    const int masks = 1 << cols;
    const double neg_inf = -std::numeric_limits<double>::infinity();
    std::vector<double> dp(masks, neg_inf);
    dp[0] = 0.0;
    // choice[r][mask]: column row r takes on the best path into mask, -1 if skipped.
    std::vector<std::vector<signed char>> choice(static_cast<std::size_t>(rows),
                                                 std::vector<signed char>(static_cast<std::size_t>(masks), -1));
    for (int r = 0; r < rows; ++r) {
        std::vector<double> next = dp;  // skip transition
        auto& ch = choice[static_cast<std::size_t>(r)];
        for (int mask = 0; mask < masks; ++mask) {
            if (dp[static_cast<std::size_t>(mask)] == neg_inf) continue;
            for (int c = 0; c < cols; ++c) {
                if (mask & (1 << c)) continue;
                const int to = mask | (1 << c);
                const double v = dp[static_cast<std::size_t>(mask)] + at(r, c);
                if (v > next[static_cast<std::size_t>(to)]) {
                    next[static_cast<std::size_t>(to)] = v;
                    ch[static_cast<std::size_t>(to)] = static_cast<signed char>(c);
                }
            }
        }
        dp = next;
    }

    int best_mask = 0;
    for (int mask = 1; mask < masks; ++mask)
        if (dp[static_cast<std::size_t>(mask)] > dp[static_cast<std::size_t>(best_mask)]) best_mask = mask;

    Selection picks;
    int mask = best_mask;
    for (int r = rows - 1; r >= 0; --r) {
        const int c = choice[static_cast<std::size_t>(r)][static_cast<std::size_t>(mask)];
        if (c >= 0) {
            if (at(r, c) > 0.0)
                picks.emplace_back(transpose ? c : r, transpose ? r : c);
            mask ^= 1 << c;
        }
    }
    std::sort(picks.begin(), picks.end(), [&](const auto& a, const auto& b) {
        const double ta = tau[static_cast<std::size_t>(a.first)][static_cast<std::size_t>(a.second)];
        const double tb = tau[static_cast<std::size_t>(b.first)][static_cast<std::size_t>(b.second)];
        if (ta != tb) return ta > tb;
        return a < b;
    });
    return picks;
}

inline double selection_total(const std::vector<std::vector<double>>& tau, const Selection& picks) {
    double total = 0.0;
    for (auto [i, j] : picks) total += tau[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return total;
}

// Assembles the posted price rows for a visit sequence: every still-free
// instance is offered at the visited client's indifference price, with the
// chosen instance discounted so the purchase is strict.
inline PricePlan plan_from_selection(const OracleTables& t, const ResourceCatalog& catalog,
                                     const Selection& picks, double delta_post) {
    PricePlan plan;
    std::vector<bool> sold(t.num_instances(), false);
    int round = 0;
    for (auto [i, j] : picks) {
        const auto ci = static_cast<std::size_t>(i);
        const auto cj = static_cast<std::size_t>(j);
        PriceVector row(t.num_instances());
        for (std::size_t k = 0; k < t.num_instances(); ++k) {
            if (sold[k] || !catalog.available[k] || !t.sellable[ci][k]) continue;
            row.offered[k] = true;
            row.p[k] = t.p_star[ci][k];
        }
        row.p[cj] = std::max(0.0, t.p_star[ci][cj] - delta_post);
        PlanVisit v;
        v.round = round++;
        v.client = i;
        v.instance = j;
        v.posted_price = row.p[cj];
        v.payment = t.tau[ci][cj];
        plan.visits.push_back(v);
        plan.posted.push_back(std::move(row));
        plan.expected_revenue += v.payment;
        sold[cj] = true;
    }
    return plan;
}

}  // namespace detail

inline PricePlan greedy_plan(const OracleTables& t, const ResourceCatalog& catalog,
                             double delta_post = kDefaultPostDiscount) {
    return detail::plan_from_selection(t, catalog, detail::greedy_select(t.tau), delta_post);
}

inline PricePlan exact_plan(const OracleTables& t, const ResourceCatalog& catalog,
                            double delta_post = kDefaultPostDiscount) {
    return detail::plan_from_selection(t, catalog, detail::exact_select(t.tau), delta_post);
}

// Selection-only entry points for raw payment matrices (no price data):
// visits carry the payment with the price column mirroring it.
inline PricePlan greedy_plan(const std::vector<std::vector<double>>& tau) {
    PricePlan plan;
    int round = 0;
    for (auto [i, j] : detail::greedy_select(tau)) {
        const double pay = tau[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        plan.visits.push_back({round++, i, j, pay, pay});
        plan.expected_revenue += pay;
    }
    return plan;
}

inline PricePlan exact_plan(const std::vector<std::vector<double>>& tau) {
    PricePlan plan;
    int round = 0;
    for (auto [i, j] : detail::exact_select(tau)) {
        const double pay = tau[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        plan.visits.push_back({round++, i, j, pay, pay});
        plan.expected_revenue += pay;
    }
    return plan;
}

}  // namespace egret
