#include "pcps/bss.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pcps/linalg.hpp"

namespace pcps {
namespace detail {

BssSelection bss_select_core(const Matrix& m, int k, double eps, const Vector* extra_coord,
                             bool enforce_stable_rank, const CalibConstants& cc) {
    require(k >= 1 && eps > 0.0 && eps < 1.0, "bss_select: bad rank or accuracy");
    const Index q = m.rows();
    require(q >= 1, "bss_select: empty input");
    require(extra_coord == nullptr || extra_coord->size() == q,
            "bss_select: extra coordinate length mismatch");

    Matrix work;
    if (extra_coord != nullptr) {
        work.resize(q, m.cols() + 1);
        work << m, *extra_coord;
    } else {
        work = m;
    }

    SvdFactors f = svd(work);
    const double top = f.sigma.size() > 0 ? f.sigma[0] * f.sigma[0] : 0.0;
    require(top > 0.0, "bss_select: zero matrix");
    if (enforce_stable_rank) {
        require(top <= 1.0 + 1e-8, "bss_select: ||M^T M||_2 exceeds 1");
        require(work.squaredNorm() <= k * top * (1.0 + 1e-8),
                "bss_select: stable rank exceeds k");
    }

    const int steps = std::max(1, static_cast<int>(std::ceil(cc.bss * k / (eps * eps))));
    if (steps >= q) {
        // Enough budget to keep every row as-is; exact and deterministic.
        BssSelection all;
        all.indices.resize(q);
        all.weights.assign(q, 1.0);
        for (Index i = 0; i < q; ++i) all.indices[i] = i;
        return all;
    }

    // Whiten within the numerical range of M^T M (pseudo-inverse cutoff
    // 1e-10 * lambda_max). The walk happens in the whitened top-rho subspace;
    // keeping more directions shrinks the truncation term but starves each
    // direction of steps, so pick the rho minimizing the combined estimate.
    Index range = 0;
    while (range < f.sigma.size() && f.sigma[range] * f.sigma[range] > 1e-10 * top) ++range;
    const Index rho_max = std::min<Index>(std::max<Index>(range, 1),
                                          std::max<Index>(1, steps / 2));
    Index rho = 1;
    double best_bound = std::numeric_limits<double>::infinity();
    for (Index r = 1; r <= rho_max; ++r) {
        const double d = static_cast<double>(steps) / static_cast<double>(r);
        const double gap = 2.0 * std::sqrt(d) / (d + 1.0);
        const double trunc = r < f.sigma.size() ? f.sigma[r] * f.sigma[r] : 0.0;
        const double bound = gap * top + trunc;
        if (bound < best_bound - 1e-15) {
            best_bound = bound;
            rho = r;
        }
    }

    Matrix u = f.u.leftCols(rho);  // rows sum to the identity in outer products
    const double d_ratio = static_cast<double>(steps) / static_cast<double>(rho);
    const double sqrt_d = std::sqrt(d_ratio);
    const double delta_u = (sqrt_d + 1.0) / (sqrt_d - 1.0);
    const double delta_l = 1.0;
    const double eps_u = (sqrt_d - 1.0) / (d_ratio + sqrt_d);
    const double eps_l = 1.0 / sqrt_d;

    double ub = static_cast<double>(rho) / eps_u;
    double lb = -static_cast<double>(rho) / eps_l;

    Matrix a_cur = Matrix::Zero(rho, rho);
    std::vector<Index> step_index(steps);
    std::vector<double> step_weight(steps);

    for (int step = 0; step < steps; ++step) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(a_cur);
        require(es.info() == Eigen::Success, "bss_select: eigen decomposition failed");
        const Vector& lam = es.eigenvalues();
        const Matrix& qv = es.eigenvectors();

        const double u_next = ub + delta_u;
        const double l_next = lb + delta_l;

        double phi_u_old = 0.0, phi_u_new = 0.0, phi_l_old = 0.0, phi_l_new = 0.0;
        for (Index i = 0; i < rho; ++i) {
            phi_u_old += 1.0 / (ub - lam[i]);
            phi_u_new += 1.0 / (u_next - lam[i]);
            phi_l_old += 1.0 / (lam[i] - lb);
            phi_l_new += 1.0 / (lam[i] - l_next);
        }
        const double u_denom = phi_u_old - phi_u_new;
        const double l_denom = phi_l_new - phi_l_old;
        require(u_denom > 0.0 && l_denom > 0.0, "bss_select: barrier potentials collapsed");

        Matrix x = u * qv;  // candidate coordinates in the eigenbasis
        Index best_i = -1;
        double best_gap = -std::numeric_limits<double>::infinity();
        double best_uval = 0.0, best_lval = 0.0;
        for (Index i = 0; i < q; ++i) {
            double uq = 0.0, ul = 0.0, lq = 0.0, ll = 0.0;
            for (Index j = 0; j < rho; ++j) {
                const double c2 = x(i, j) * x(i, j);
                const double du = u_next - lam[j];
                const double dl = lam[j] - l_next;
                uq += c2 / (du * du);
                ul += c2 / du;
                lq += c2 / (dl * dl);
                ll += c2 / dl;
            }
            const double uval = uq / u_denom + ul;
            const double lval = lq / l_denom - ll;
            const double gap = lval - uval;  // ties keep the lowest index
            if (gap > best_gap) {
                best_gap = gap;
                best_i = i;
                best_uval = uval;
                best_lval = lval;
            }
        }
        require(best_i >= 0, "bss_select: no candidate row");

        double t;
        if (best_gap > 0.0 && best_uval + best_lval > 0.0) {
            t = 2.0 / (best_uval + best_lval);  // midpoint of the valid range [1/L, 1/U]
        } else {
            t = 1.0 / std::max(best_uval, 1e-12);  // numerical corner: upper-safe step
        }

        a_cur.noalias() += t * (u.row(best_i).transpose() * u.row(best_i));
        step_index[step] = best_i;
        step_weight[step] = t;
        ub = u_next;
        lb = l_next;
    }

    // The two barriers pin the spectrum into a positive interval; the measured
    // extremes give the tightest symmetric rescale toward the identity.
    Eigen::SelfAdjointEigenSolver<Matrix> es(a_cur);
    require(es.info() == Eigen::Success, "bss_select: final eigen decomposition failed");
    const double lam_min = es.eigenvalues().minCoeff();
    const double lam_max = es.eigenvalues().maxCoeff();
    require(lam_max > 0.0, "bss_select: selection produced a zero Gram");
    const double scale = lam_min > 0.0 ? 2.0 / (lam_max + lam_min) : 1.0 / lam_max;

    BssSelection out;
    out.indices = std::move(step_index);
    out.weights.resize(steps);
    for (int t = 0; t < steps; ++t) out.weights[t] = step_weight[t] * scale;
    return out;
}

}  // namespace detail

BssSelection bss_select(const Matrix& m, int k, double eps, bool with_norm_row,
                        const CalibConstants& cc) {
    if (!with_norm_row) {
        return detail::bss_select_core(m, k, eps, nullptr, /*enforce_stable_rank=*/true, cc);
    }
    // The appended coordinate is the row norm scaled by 1/sqrt(k): the extra
    // diagonal of the augmented Gram is then tr(M^T M)/k <= 1, so the whole
    // augmented spectrum stays at unit scale and the spectral guarantee on it
    // pins the weighted trace to within eps*k of the true trace.
    Vector norms(m.rows());
    const double norm_scale = 1.0 / std::sqrt(static_cast<double>(k));
    for (Index i = 0; i < m.rows(); ++i) norms[i] = norm_scale * m.row(i).norm();
    SvdFactors f = svd(m);
    const double top = f.sigma.size() > 0 ? f.sigma[0] * f.sigma[0] : 0.0;
    require(top > 0.0, "bss_select: zero matrix");
    require(top <= 1.0 + 1e-8, "bss_select: ||M^T M||_2 exceeds 1");
    require(m.squaredNorm() <= k * top * (1.0 + 1e-8), "bss_select: stable rank exceeds k");
    return detail::bss_select_core(m, k, eps, &norms, /*enforce_stable_rank=*/false, cc);
}

}  // namespace pcps
