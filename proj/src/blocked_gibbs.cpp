#include "hhdp/blocked_gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "hhdp/errors.hpp"
#include "hhdp/kernels.hpp"
#include "hhdp/special_fn.hpp"

namespace hhdp {

namespace {

double log_normal_pdf(double x, const Atom& a) {
    const double d = x - a.mu;
    return -0.5 * std::log(2.0 * std::numbers::pi * a.sigma2) - 0.5 * d * d / a.sigma2;
}

// ln Γ(e^{log_x}) without forming Γ of a denormal argument
double log_gamma_from_log(double log_x) {
    const double x = std::exp(log_x);
    return log_gamma(x + 1.0) - log_x;
}

}  // namespace

void SamplerConfig::validate() const {
    if (K < 1 || L < 1) throw UsageError("truncation levels K and L must be at least 1");
    if (iterations <= burn_in) throw UsageError("iterations must exceed burn_in");
    if (thin < 1) throw UsageError("thin must be at least 1");
}

BlockedGibbs::BlockedGibbs(GroupedData data, HhdpParams params, NigParams nig,
                           SamplerConfig config)
    : data_(std::move(data)), params_(params), nig_(nig), config_(config),
      rng_(derive_stream_seed(config.seed, static_cast<std::uint64_t>(config.chain))) {
    data_.validate();
    params_.validate();
    nig_.validate();
    config_.validate();
    offset_.push_back(0);
    for (const auto& pop : data_.values) {
        x_.insert(x_.end(), pop.begin(), pop.end());
        offset_.push_back(x_.size());
    }
    initialize();
}

std::size_t BlockedGibbs::atom_index(std::size_t k, std::size_t l) const {
    return config_.model == Model::HHDP ? l : k * config_.L + l;
}

void BlockedGibbs::initialize() {
    const std::size_t K = config_.K;
    const std::size_t L = config_.L;
    const std::size_t J = data_.populations();
    auto& s = state_;

    s.z.resize(J);
    for (auto& zj : s.z) zj = static_cast<std::size_t>(uniform_open(rng_) * static_cast<double>(K));
    for (auto& zj : s.z) zj = std::min(zj, K - 1);

    // quantile bins of the pooled sample
    const std::size_t bins = std::min<std::size_t>(L, 10);
    std::vector<std::size_t> order(x_.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x_[a] < x_[b]; });
    std::vector<std::size_t> bin(x_.size());
    for (std::size_t r = 0; r < order.size(); ++r) bin[order[r]] = r * bins / order.size();
    s.zeta.assign(J, {});
    for (std::size_t j = 0; j < J; ++j) {
        for (std::size_t i = offset_[j]; i < offset_[j + 1]; ++i) s.zeta[j].push_back(bin[i]);
    }

    const std::size_t n_atoms = config_.model == Model::HHDP ? L : K * L;
    s.atoms.assign(n_atoms, Atom{});
    s.log_omega0.assign(L, -std::log(static_cast<double>(L)));
    s.omega0.assign(L, 1.0 / static_cast<double>(L));
    s.omega.assign(K * L, 1.0 / static_cast<double>(L));
    s.log_omega.assign(K * L, -std::log(static_cast<double>(L)));
    s.pi_star.assign(K, 1.0 / static_cast<double>(K));
    s.log_pi.assign(K, -std::log(static_cast<double>(K)));
    if (config_.model == Model::NDP) {
        s.omega0.clear();
        s.log_omega0.clear();
    } else {
        const std::vector<double> shape(L, params_.hdp.beta0 / static_cast<double>(L));
        s.log_omega0 = log_dirichlet(rng_, shape);
        for (std::size_t l = 0; l < L; ++l) s.omega0[l] = std::exp(s.log_omega0[l]);
    }
    s.mh.log_step.assign(L > 0 ? L - 1 : 0, std::log(0.5));
    s.mh.batch_accepts.assign(s.mh.log_step.size(), 0);

    step_atoms();
    step_obs_weights();
    step_distributional_weights();
}

std::vector<std::size_t> BlockedGibbs::population_counts() const {
    std::vector<std::size_t> m(config_.K, 0);
    for (std::size_t zj : state_.z) ++m[zj];
    return m;
}

std::vector<std::size_t> BlockedGibbs::observation_counts() const {
    const std::size_t L = config_.L;
    std::vector<std::size_t> n(config_.K * L, 0);
    for (std::size_t j = 0; j < state_.z.size(); ++j) {
        for (std::size_t l : state_.zeta[j]) ++n[state_.z[j] * L + l];
    }
    return n;
}

void BlockedGibbs::step_atoms() {
    auto& s = state_;
    std::vector<ClusterStats> stats(s.atoms.size());
    for (std::size_t j = 0; j < s.z.size(); ++j) {
        for (std::size_t i = 0; i < s.zeta[j].size(); ++i) {
            stats[atom_index(s.z[j], s.zeta[j][i])].add(x_[offset_[j] + i]);
        }
    }
    for (std::size_t a = 0; a < s.atoms.size(); ++a) {
        s.atoms[a] = sample_nig(nig_posterior_update(nig_, stats[a]), rng_);
    }
}

void BlockedGibbs::step_distributional_weights() {
    const auto m = population_counts();
    std::vector<double> shape(config_.K);
    const double base = params_.alpha / static_cast<double>(config_.K);
    for (std::size_t k = 0; k < config_.K; ++k) shape[k] = base + static_cast<double>(m[k]);
    state_.log_pi = log_dirichlet(rng_, shape);
    for (std::size_t k = 0; k < config_.K; ++k) state_.pi_star[k] = std::exp(state_.log_pi[k]);
}

double BlockedGibbs::base_weights_log_target(const std::vector<double>& log_w,
                                             const std::vector<double>& log_xi,
                                             std::size_t rows) const {
    // density of y_l = ln(ω_l / ω_L), Jacobian ∏_l ω_l included
    const double K = static_cast<double>(rows);
    const double a = params_.hdp.beta0 / static_cast<double>(config_.L);
    const double beta = params_.hdp.beta;
    const double log_beta = std::log(beta);
    double t = 0.0;
    for (std::size_t l = 0; l < log_w.size(); ++l) {
        t += a * log_w[l] + beta * std::exp(log_w[l]) * log_xi[l] -
             K * log_gamma_from_log(log_beta + log_w[l]);
    }
    return t;
}

void BlockedGibbs::step_base_weights_mh() {
    if (config_.model != Model::HHDP) return;
    const std::size_t K = config_.K;
    const std::size_t L = config_.L;
    auto& s = state_;
    auto& mh = s.mh;
    if (L < 2) return;

    // Rows of empty clusters are integrated out here; step (4) redraws them
    // from Dir(β ω₀) right after.
    const auto m = population_counts();
    std::vector<double> log_xi(L, 0.0);
    std::size_t rows = 0;
    for (std::size_t k = 0; k < K; ++k) {
        if (m[k] == 0) continue;
        ++rows;
        for (std::size_t l = 0; l < L; ++l) log_xi[l] += s.log_omega[k * L + l];
    }

    std::vector<double> y(L - 1);
    for (std::size_t l = 0; l + 1 < L; ++l) y[l] = s.log_omega0[l] - s.log_omega0[L - 1];

    auto to_log_w = [&](const std::vector<double>& yy, std::vector<double>& out) {
        out.resize(L);
        std::copy(yy.begin(), yy.end(), out.begin());
        out[L - 1] = 0.0;
        const double norm = log_sum_exp(out);
        for (double& v : out) v -= norm;
    };

    std::vector<double> cur_w;
    to_log_w(y, cur_w);
    double cur = base_weights_log_target(cur_w, log_xi, rows);
    if (!std::isfinite(cur)) {
        throw NumericalError("base-weight target is not finite at the current state\n" + dump());
    }

    std::vector<double> prop_w;
    for (std::size_t c = 0; c + 1 < L; ++c) {
        const double old = y[c];
        y[c] = old + std::exp(mh.log_step[c]) * standard_normal(rng_);
        to_log_w(y, prop_w);
        const double prop = base_weights_log_target(prop_w, log_xi, rows);
        ++mh.proposed;
        if (std::isfinite(prop) && std::log(uniform_open(rng_)) < prop - cur) {
            cur = prop;
            cur_w.swap(prop_w);
            ++mh.accepted;
            ++mh.batch_accepts[c];
        } else {
            y[c] = old;
        }
    }
    s.log_omega0 = cur_w;
    for (std::size_t l = 0; l < L; ++l) s.omega0[l] = std::exp(cur_w[l]);

    if (mh.frozen) return;
    if (++mh.sweeps_in_batch == AdaptiveMh::batch_size) {
        ++mh.batches;
        const double delta = std::min(0.01, 1.0 / std::sqrt(static_cast<double>(mh.batches)));
        for (std::size_t c = 0; c + 1 < L; ++c) {
            const double rate = static_cast<double>(mh.batch_accepts[c]) /
                                static_cast<double>(AdaptiveMh::batch_size);
            mh.log_step[c] += rate > AdaptiveMh::target_rate ? delta : -delta;
            mh.batch_accepts[c] = 0;
        }
        mh.sweeps_in_batch = 0;
    }
}

void BlockedGibbs::step_obs_weights() {
    const std::size_t K = config_.K;
    const std::size_t L = config_.L;
    auto& s = state_;
    const auto n = observation_counts();
    std::vector<double> shape(L);
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t l = 0; l < L; ++l) {
            const double prior = config_.model == Model::HHDP
                                     ? params_.hdp.beta * s.omega0[l]
                                     : params_.hdp.beta / static_cast<double>(L);
            shape[l] = prior + static_cast<double>(n[k * L + l]);
        }
        const auto row = log_dirichlet(rng_, shape);
        for (std::size_t l = 0; l < L; ++l) {
            s.log_omega[k * L + l] = row[l];
            s.omega[k * L + l] = std::exp(row[l]);
        }
    }
}

void BlockedGibbs::step_memberships() {
    const std::size_t K = config_.K;
    const std::size_t L = config_.L;
    const std::size_t J = data_.populations();
    const std::size_t n = x_.size();
    auto& s = state_;
    if (n == 0) {
        for (std::size_t j = 0; j < J; ++j) s.z[j] = sample_log_categorical(rng_, s.log_pi);
        return;
    }

    const std::size_t blocks = config_.model == Model::HHDP ? 1 : K;
    std::vector<double> mu(L), log_norm(L), nhp(L);
    lik_.resize(blocks * n * L);
    row_max_.resize(blocks * n);
    dots_.resize(n * K);
    for (std::size_t b = 0; b < blocks; ++b) {
        for (std::size_t l = 0; l < L; ++l) {
            const Atom& a = s.atoms[b * L + l];
            mu[l] = a.mu;
            log_norm[l] = -0.5 * std::log(2.0 * std::numbers::pi * a.sigma2);
            nhp[l] = -0.5 / a.sigma2;
        }
        kernels::GaussianAtoms atoms{mu, log_norm, nhp};
        std::span<double> lik(lik_.data() + b * n * L, n * L);
        std::span<double> rmax(row_max_.data() + b * n, n);
        kernels::gaussian_scaled_likelihood(x_, atoms, lik, rmax);
        if (blocks == 1) {
            kernels::mixture_dot(lik, n, L, s.omega, K, dots_);
        } else {
            std::vector<double> col(n);
            kernels::mixture_dot(lik, n, L, std::span<const double>(s.omega).subspan(b * L, L), 1,
                                 col);
            for (std::size_t i = 0; i < n; ++i) dots_[i * K + b] = col[i];
        }
    }

    // exact log-space fallback when a scaled dot product underflows
    auto log_mix = [&](std::size_t i, std::size_t k) {
        const std::size_t b = blocks == 1 ? 0 : k;
        const double d = dots_[i * K + k];
        if (d > 0.0) return std::log(d) + row_max_[b * n + i];
        double acc = kNegInf;
        for (std::size_t l = 0; l < L; ++l) {
            acc = log_add_exp(acc, s.log_omega[k * L + l] +
                                       log_normal_pdf(x_[i], s.atoms[atom_index(k, l)]));
        }
        return acc;
    };

    std::vector<double> lw(K);
    std::vector<double> p(L);
    for (std::size_t j = 0; j < J; ++j) {
        for (std::size_t k = 0; k < K; ++k) {
            double t = s.log_pi[k];
            for (std::size_t i = offset_[j]; i < offset_[j + 1]; ++i) t += log_mix(i, k);
            lw[k] = t;
        }
        const std::size_t k = sample_log_categorical(rng_, lw);
        s.z[j] = k;
        const std::size_t b = blocks == 1 ? 0 : k;
        for (std::size_t i = offset_[j]; i < offset_[j + 1]; ++i) {
            const double* lik = lik_.data() + (b * n + i) * L;
            double total = 0.0;
            for (std::size_t l = 0; l < L; ++l) {
                p[l] = s.omega[k * L + l] * lik[l];
                total += p[l];
            }
            std::size_t pick = L - 1;
            if (total > 0.0 && std::isfinite(total)) {
                double u = uniform_open(rng_) * total;
                for (std::size_t l = 0; l < L; ++l) {
                    u -= p[l];
                    if (u <= 0.0) {
                        pick = l;
                        break;
                    }
                }
                while (p[pick] == 0.0 && pick > 0) --pick;
            } else {
                for (std::size_t l = 0; l < L; ++l) {
                    p[l] = s.log_omega[k * L + l] +
                           log_normal_pdf(x_[i], s.atoms[atom_index(k, l)]);
                }
                pick = sample_log_categorical(rng_, p);
            }
            s.zeta[j][i - offset_[j]] = pick;
        }
    }
}

void BlockedGibbs::sweep() {
    step_atoms();
    step_distributional_weights();
    step_base_weights_mh();
    step_obs_weights();
    step_memberships();
    check_state();
}

void BlockedGibbs::check_state() const {
    const auto& s = state_;
    auto bad = [](double v) { return !std::isfinite(v); };
    bool ok = true;
    for (const auto& a : s.atoms) ok = ok && !bad(a.mu) && a.sigma2 > 0.0 && !bad(a.sigma2);
    for (double v : s.log_pi) ok = ok && !std::isnan(v);
    for (double v : s.log_omega) ok = ok && !std::isnan(v);
    for (double v : s.log_omega0) ok = ok && !std::isnan(v);
    auto on_simplex = [](std::span<const double> w) {
        double t = 0.0;
        for (double v : w) t += v;
        return std::abs(t - 1.0) < 1e-10;
    };
    ok = ok && on_simplex(s.pi_star);
    if (!s.omega0.empty()) ok = ok && on_simplex(s.omega0);
    for (std::size_t k = 0; k < config_.K; ++k) {
        ok = ok && on_simplex(std::span<const double>(s.omega).subspan(k * config_.L, config_.L));
    }
    if (!ok) throw NumericalError("invalid sampler state\n" + dump());
}

std::string BlockedGibbs::dump() const {
    std::ostringstream os;
    os.precision(17);
    const auto& s = state_;
    os << "z:";
    for (auto v : s.z) os << ' ' << v;
    os << "\npi:";
    for (auto v : s.log_pi) os << ' ' << v;
    os << "\nlog omega0:";
    for (auto v : s.log_omega0) os << ' ' << v;
    os << "\natoms:";
    for (const auto& a : s.atoms) os << " (" << a.mu << ", " << a.sigma2 << ')';
    os << '\n';
    return os.str();
}

Draw BlockedGibbs::snapshot(std::size_t iteration) const {
    const auto& s = state_;
    const std::size_t L = config_.L;
    const std::size_t J = s.z.size();
    Draw d;
    d.chain = config_.chain;
    d.iteration = iteration;
    d.z = s.z;
    d.pi_star = s.pi_star;
    d.omega0 = s.omega0;
    d.zeta = s.zeta;
    d.weights.resize(J);
    if (config_.model == Model::HHDP) {
        d.atoms = s.atoms;
        for (std::size_t j = 0; j < J; ++j) {
            d.weights[j].assign(s.omega.begin() + s.z[j] * L, s.omega.begin() + (s.z[j] + 1) * L);
        }
        return d;
    }
    // NDP: keep only the atom blocks of clusters in use
    std::vector<std::size_t> used;
    for (std::size_t zj : s.z) {
        if (std::find(used.begin(), used.end(), zj) == used.end()) used.push_back(zj);
    }
    for (std::size_t k : used) {
        d.atoms.insert(d.atoms.end(), s.atoms.begin() + k * L, s.atoms.begin() + (k + 1) * L);
    }
    for (std::size_t j = 0; j < J; ++j) {
        const std::size_t slot =
            static_cast<std::size_t>(std::find(used.begin(), used.end(), s.z[j]) - used.begin());
        d.weights[j].assign(used.size() * L, 0.0);
        std::copy(s.omega.begin() + s.z[j] * L, s.omega.begin() + (s.z[j] + 1) * L,
                  d.weights[j].begin() + slot * L);
        for (auto& l : d.zeta[j]) l += slot * L;
    }
    return d;
}

void run_blocked_gibbs(const GroupedData& data, const HhdpParams& params, const NigParams& nig,
                       const SamplerConfig& config, const DrawSink& sink) {
    BlockedGibbs g(data, params, nig, config);
    for (std::size_t it = 1; it <= config.iterations; ++it) {
        if (it == config.burn_in + 1) g.mutable_state().mh.frozen = true;
        g.sweep();
        if (it > config.burn_in && (it - config.burn_in) % config.thin == 0) sink(g.snapshot(it));
    }
}

PosteriorDraws run_blocked_gibbs(const GroupedData& data, const HhdpParams& params,
                                 const NigParams& nig, const SamplerConfig& config) {
    PosteriorDraws out;
    auto& m = out.meta;
    m.model = config.model;
    m.sampler = SamplerKind::Blocked;
    m.sizes = data.sizes();
    m.K = config.K;
    m.L = config.L;
    m.params = params;
    m.nig = nig;
    m.iterations = config.iterations;
    m.burn_in = config.burn_in;
    m.thin = config.thin;
    m.seed = config.seed;
    run_blocked_gibbs(data, params, nig, config, [&](const Draw& d) { out.draws.push_back(d); });
    return out;
}

}  // namespace hhdp
