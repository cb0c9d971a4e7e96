// Built with vector-math flags (see core/CMakeLists.txt): the lane loops below
// are written so the compiler turns them into SIMD code with vectorised
// log/sin/sqrt/exp.

#include "sim_kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace fxband::detail {

namespace {

constexpr int kChunk = 16;  // steps of normals generated at once (even)
constexpr float kTwoPiF = 6.2831853f;
constexpr float kPiF = 3.1415927f;
constexpr float kHalfPiF = 1.5707964f;
// |z| from Box-Muller with 24-bit uniforms never exceeds sqrt(-2 ln 2^-25).
constexpr double kMaxAbsNormal = 5.9;
// Below this |y| the degree-6 Taylor polynomial matches exp(y) to ~2e-11.
constexpr double kPolyExpLimit = 0.1;

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct SplitMix64 {
    std::uint64_t state;
    std::uint64_t next() {
        state += 0x9e3779b97f4a7c15ULL;
        return mix64(state);
    }
};

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

// xoshiro256++ state for one stream.
struct Xoshiro {
    std::uint64_t s[4];

    std::uint64_t next() {
        const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
        const std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }

    double uniform() { return static_cast<double>(static_cast<std::int64_t>(next() >> 11)) * 0x1.0p-53; }
};

Xoshiro seeded_stream(std::uint64_t seed, std::uint64_t path, std::uint64_t stream,
                      std::uint64_t salt) {
    SplitMix64 sm{mix64(seed) ^ mix64(path * 4 + stream) ^ mix64(salt + 0x5851f42d4c957f2dULL)};
    Xoshiro x{};
    for (auto& w : x.s) w = sm.next();
    return x;
}

inline double poly_exp(double y) {
    return 1.0 + y * (1.0 + y * (0.5 + y * (1.0 / 6.0 + y * (1.0 / 24.0 + y * (1.0 / 120.0 + y * (1.0 / 720.0))))));
}

struct alignas(64) LaneState {
    // Gaussian stream, structure-of-arrays.
    std::array<std::uint64_t, kLanes> g0, g1, g2, g3;
    std::array<double, kLanes> x, cost, drift, vol;
    std::array<std::int64_t, kLanes> window_end, interventions;
    std::array<bool, kLanes> reacting;
    // Current reaction draw, for event records.
    std::array<double, kLanes> t_drawn, sigma2_drawn, mu2_drawn;
};

class Block {
public:
    Block(const KernelProblem& p, std::span<const std::uint64_t> ids, std::vector<SimEvent>* events)
        : p_(p), n_real_(static_cast<int>(ids.size())), events_(events) {
        base_drift_ = (p.params.mu - 0.5 * p.params.sigma * p.params.sigma) * p.dt;
        base_vol_ = p.params.sigma * std::sqrt(p.dt);
        for (int l = 0; l < kLanes; ++l) {
            const std::uint64_t id = ids[std::min(l, n_real_ - 1)];
            Xoshiro g = seeded_stream(p.seed, id, 0, p.stream_salt);
            st_.g0[l] = g.s[0];
            st_.g1[l] = g.s[1];
            st_.g2[l] = g.s[2];
            st_.g3[l] = g.s[3];
            events_rng_[l] = seeded_stream(p.seed, id, 1, p.stream_salt);
            ids_[l] = id;
            st_.x[l] = p.x0;
            st_.cost[l] = 0.0;
            st_.drift[l] = base_drift_;
            st_.vol[l] = base_vol_;
            st_.window_end[l] = 0;
            st_.interventions[l] = 0;
            st_.reacting[l] = false;
            st_.t_drawn[l] = st_.sigma2_drawn[l] = st_.mu2_drawn[l] = 0.0;
        }
        if (events_) lane_events_.resize(n_real_);

        // Largest |half log-increment| over every regime the law can produce.
        const double s_hi = std::max(p.params.sigma, p.params.sigma + law_max(p.law.sigma_shift_law));
        const double mu_abs = std::max({std::abs(p.params.mu), std::abs(p.params.mu + law_min(p.law.mu_shift_law)),
                                        std::abs(p.params.mu + law_max(p.law.mu_shift_law))});
        const double drift_abs = (mu_abs + 0.5 * s_hi * s_hi) * p.dt;
        use_poly_ = 0.5 * (drift_abs + s_hi * std::sqrt(p.dt) * kMaxAbsNormal) <= kPolyExpLimit;
    }

    void run(std::span<PathResult> out) {
        for (int l = 0; l < kLanes; ++l) at_grid(l, 0);
        // Exact discount mass of one step, so constant states cost exactly.
        const double step_mass = -std::expm1(-p_.params.r * p_.dt) / p_.params.r;
        for (std::int64_t c0 = 0; c0 < p_.steps; c0 += kChunk) {
            fill_normals();
            const int n = static_cast<int>(std::min<std::int64_t>(kChunk, p_.steps - c0));
            for (int k = 0; k < n; ++k) {
                const std::int64_t kk = c0 + k + 1;
                const double w = std::exp(-p_.params.r * static_cast<double>(c0 + k) * p_.dt) * step_mass;
                const bool attention = use_poly_ ? step<true>(k, kk, w) : step<false>(k, kk, w);
                if (attention)
                    for (int l = 0; l < kLanes; ++l) at_grid(l, kk);
            }
            for (int l = 0; l < kLanes; ++l)
                if (!(st_.x[l] > 0.0)) throw std::logic_error("simulated rate left the positive axis");
        }
        for (int l = 0; l < n_real_; ++l) out[l] = {st_.cost[l], st_.interventions[l]};
        if (events_)
            for (auto& ev : lane_events_) events_->insert(events_->end(), ev.begin(), ev.end());
    }

    /// Appends lane 0's next chunk of normals.
    void next_normals(std::vector<double>& out) {
        fill_normals();
        for (int k = 0; k < kChunk; ++k) out.push_back(z_[k][0]);
    }

private:
    void fill_normals() {
        // One 64-bit draw per lane gives two 24-bit uniforms and, through
        // Box-Muller in single precision, two normals.
        constexpr int kHalf = kChunk / 2;
        for (int k = 0; k < kHalf; ++k) {
#pragma omp simd
            for (int l = 0; l < kLanes; ++l) {
                std::uint64_t s0 = st_.g0[l], s1 = st_.g1[l], s2 = st_.g2[l], s3 = st_.g3[l];
                const std::uint64_t r = rotl(s0 + s3, 23) + s0;
                const std::uint64_t t = s1 << 17;
                s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3; s2 ^= t; s3 = rotl(s3, 45);
                st_.g0[l] = s0; st_.g1[l] = s1; st_.g2[l] = s2; st_.g3[l] = s3;
                u1_[k][l] = (static_cast<float>(static_cast<std::int32_t>(r >> 40)) + 0.5f) * 0x1.0p-24f;
                u2_[k][l] = static_cast<float>(static_cast<std::int32_t>((r >> 8) & 0xffffffu)) * 0x1.0p-24f;
            }
        }
        constexpr int kCount = kHalf * kLanes;
        float* u1 = &u1_[0][0];
        float* u2 = &u2_[0][0];
        double* z = &z_[0][0];
#pragma omp simd
        for (int i = 0; i < kCount; ++i) {
            u1[i] = std::sqrt(-2.0f * std::log(u1[i]));
            u2[i] = kTwoPiF * u2[i] - kPiF;
        }
        // cos recovered from sin and the quadrant of the angle.
#pragma omp simd
        for (int i = 0; i < kCount; ++i) {
            const float sn = std::sin(u2[i]);
            const float cs_abs = std::sqrt(std::max(0.0f, (1.0f - sn) * (1.0f + sn)));
            const float cs = std::abs(u2[i]) < kHalfPiF ? cs_abs : -cs_abs;
            z[i] = static_cast<double>(u1[i] * cs);
            z[kCount + i] = static_cast<double>(u1[i] * sn);
        }
    }

    template <bool Poly>
    bool step(int k, std::int64_t kk, double w) {
        const double a = p_.policy.a;
        const double b = p_.policy.b;
        const double rho = p_.params.rho;
        const double* z = z_[k];
        std::int64_t flagged = 0;
#pragma omp simd reduction(+ : flagged)
        for (int l = 0; l < kLanes; ++l) {
            const double y = 0.5 * (st_.drift[l] + st_.vol[l] * z[l]);
            const double h = Poly ? poly_exp(y) : std::exp(y);
            const double xm = st_.x[l] * h;
            const double xn = xm * h;
            const double dev = xm - rho;
            st_.cost[l] += w * dev * dev;
            st_.x[l] = xn;
            const std::int64_t outside = (xn > a && xn < b) ? 0 : 1;
            const std::int64_t eligible = kk >= st_.window_end[l] ? 1 : 0;
            const std::int64_t closing = kk == st_.window_end[l] ? 1 : 0;
            flagged += (outside & eligible) | closing;
        }
        return flagged != 0;
    }

    // Grid-time bookkeeping for one lane: close an expired reaction window,
    // then intervene if the rate is outside the band.
    void at_grid(int l, std::int64_t kk) {
        const double t = static_cast<double>(kk) * p_.dt;
        if (st_.reacting[l] && kk == st_.window_end[l]) {
            st_.reacting[l] = false;
            st_.drift[l] = base_drift_;
            st_.vol[l] = base_vol_;
            record(l, {ids_[l], t, EventKind::reaction_end, st_.x[l], st_.x[l], st_.t_drawn[l],
                       st_.sigma2_drawn[l], st_.mu2_drawn[l]});
        }
        if (kk < st_.window_end[l]) return;
        const double x = st_.x[l];
        if (x > p_.policy.a && x < p_.policy.b) return;

        st_.x[l] = p_.policy.alpha;
        st_.cost[l] += std::exp(-p_.params.r * t) * p_.k_fixed;
        ++st_.interventions[l];
        Xoshiro& ev = events_rng_[l];
        const double u_t = ev.uniform();
        const double u_s = ev.uniform();
        const double u_m = ev.uniform();
        const double t_react = law_sample(p_.law.t_law, u_t);
        const double sigma2 = p_.params.sigma + law_sample(p_.law.sigma_shift_law, u_s);
        const double mu2 = p_.params.mu + law_sample(p_.law.mu_shift_law, u_m);
        st_.t_drawn[l] = t_react;
        st_.sigma2_drawn[l] = sigma2;
        st_.mu2_drawn[l] = mu2;
        const std::int64_t window =
            t_react > 0.0 ? static_cast<std::int64_t>(std::ceil(t_react / p_.dt - 1e-9)) : 0;
        st_.window_end[l] = kk + window;
        if (window > 0) {
            st_.reacting[l] = true;
            st_.drift[l] = (mu2 - 0.5 * sigma2 * sigma2) * p_.dt;
            st_.vol[l] = sigma2 * std::sqrt(p_.dt);
        }
        record(l, {ids_[l], t, EventKind::intervene, x, p_.policy.alpha, t_react, sigma2, mu2});
    }

    void record(int l, const SimEvent& ev) {
        if (events_ && l < n_real_) lane_events_[l].push_back(ev);
    }

    const KernelProblem& p_;
    int n_real_;
    std::vector<SimEvent>* events_;
    std::vector<std::vector<SimEvent>> lane_events_;
    double base_drift_ = 0.0;
    double base_vol_ = 0.0;
    bool use_poly_ = false;
    LaneState st_;
    std::array<Xoshiro, kLanes> events_rng_;
    std::array<std::uint64_t, kLanes> ids_;
    alignas(64) float u1_[kChunk / 2][kLanes];
    alignas(64) float u2_[kChunk / 2][kLanes];
    alignas(64) double z_[kChunk][kLanes];
};

}  // namespace

void simulate_block(const KernelProblem& problem, std::span<const std::uint64_t> path_ids,
                    std::span<PathResult> out, std::vector<SimEvent>* events) {
    if (path_ids.empty() || path_ids.size() > static_cast<std::size_t>(kLanes) ||
        out.size() < path_ids.size())
        throw std::invalid_argument("simulate_block: bad lane count");
    auto block = std::make_unique<Block>(problem, path_ids, events);
    block->run(out);
}

std::vector<double> gaussian_stream(std::uint64_t seed, std::uint64_t path, std::size_t n) {
    KernelProblem problem;
    problem.policy = {0.5, 2.0, 1.0};
    problem.params = {0.0, 0.1, 0.05, 1.0};
    problem.x0 = 1.0;
    problem.dt = 1e-3;
    problem.seed = seed;
    const std::uint64_t id = path;
    auto block = std::make_unique<Block>(problem, std::span(&id, 1), nullptr);
    std::vector<double> out;
    out.reserve(n + kChunk);
    while (out.size() < n) block->next_normals(out);
    out.resize(n);
    return out;
}

}  // namespace fxband::detail
