#include "mtsf/stability.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "mtsf/errors.hpp"

namespace mtsf {

HurwitzVerdict hurwitzCheck(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) throw ShapeError("Hurwitz check needs a square matrix");
  HurwitzVerdict out;
  if (A.size() == 0) return out;
  const Eigen::EigenSolver<Eigen::MatrixXd> solver(A, false);
  out.eigenvalues = solver.eigenvalues();
  out.abscissa = out.eigenvalues.real().maxCoeff();
  out.hurwitz = out.abscissa < 0.0;
  return out;
}

LyapunovCertificate solveLyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || Q.rows() != n || Q.cols() != n) {
    throw ShapeError("Lyapunov equation needs square A and Q of equal size");
  }
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, Q.cwiseAbs().maxCoeff()) ||
      Eigen::LLT<Eigen::MatrixXd>(Q).info() != Eigen::Success) {
    throw DomainError("Q must be symmetric positive definite");
  }
  const auto verdict = hurwitzCheck(A);
  if (!verdict.hurwitz) {
    std::ostringstream msg;
    msg << "A is not Hurwitz (spectral abscissa " << verdict.abscissa
        << "); eigenvalues with nonnegative real part:";
    for (Eigen::Index k = 0; k < verdict.eigenvalues.size(); ++k) {
      const auto& ev = verdict.eigenvalues(k);
      if (ev.real() >= 0.0) msg << ' ' << ev.real() << (ev.imag() >= 0 ? "+" : "") << ev.imag() << 'i';
    }
    throw CertificateError(msg.str());
  }

  // (I kron A^T + A^T kron I) vec(P) = -vec(Q), column-major vec.
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd At = A.transpose();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      K.block(i * n, j * n, n, n) += I(i, j) * At;
      K.block(i * n, j * n, n, n) += At(i, j) * I;
    }
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(Q.data(), n * n);
  Eigen::VectorXd vecP = lu.solve(rhs);
  vecP += lu.solve(rhs - K * vecP);  // one refinement step

  LyapunovCertificate cert{A, Q, Eigen::Map<Eigen::MatrixXd>(vecP.data(), n, n), 0.0};
  cert.P = 0.5 * (cert.P + cert.P.transpose()).eval();
  cert.residual = (A.transpose() * cert.P + cert.P * A + Q).cwiseAbs().maxCoeff();
  if (Eigen::LLT<Eigen::MatrixXd>(cert.P).info() != Eigen::Success) {
    throw CertificateError("Lyapunov solution is not positive definite");
  }
  return cert;
}

Eigen::MatrixXd companionMatrix(const Eigen::VectorXd& k1, const Eigen::VectorXd& k2) {
  const Eigen::Index n = k1.size();
  if (k2.size() != n) throw ShapeError("companion gain vectors differ in length");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  out.topRightCorner(n, n).setIdentity();
  out.bottomLeftCorner(n, n) = (-k1).asDiagonal();
  out.bottomRightCorner(n, n) = (-k2).asDiagonal();
  return out;
}

Eigen::MatrixXd companionMatrix(Eigen::Index n, const PdGains& gains) {
  return companionMatrix(Eigen::VectorXd::Constant(n, gains.proportional),
                         Eigen::VectorXd::Constant(n, gains.derivative));
}

Eigen::MatrixXd couplingInput(const Eigen::MatrixXd& kbar) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * kbar.rows(), 2 * kbar.cols());
  out.bottomRightCorner(kbar.rows(), kbar.cols()) = -kbar;
  return out;
}

double minSymmetricEigenvalue(const Eigen::MatrixXd& M) {
  const Eigen::MatrixXd sym = 0.5 * (M + M.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

bool isPositiveDefinite(const Eigen::MatrixXd& M) { return minSymmetricEigenvalue(M) > 0.0; }

Eigen::MatrixXd EpsilonBound::assemble(double eps) const {
  const Eigen::Index a = A.rows();
  const Eigen::Index c = fast_Q.rows();
  Eigen::MatrixXd out(a + c, a + c);
  out.topLeftCorner(a, a) = A;
  out.topRightCorner(a, c) = B;
  out.bottomLeftCorner(c, a) = B.transpose();
  out.bottomRightCorner(c, c) = weight / (previous_scale * eps) * fast_Q;
  return out;
}

EpsilonBound compositeEpsilonBound(const Eigen::MatrixXd& slow_Q, double d,
                                   const Eigen::MatrixXd& fast_P, const Eigen::MatrixXd& fast_Q,
                                   const std::vector<Eigen::MatrixXd>& couplings,
                                   double previous_scale, double cap) {
  if (!(d > 0.0 && d < 1.0)) {
    throw DomainError("composite weight d must lie in (0, 1), got " + std::to_string(d));
  }
  if (!(previous_scale > 0.0) || !(cap > 0.0)) {
    throw DomainError("scale and cap must be positive");
  }
  const Eigen::Index fast = fast_P.rows();
  Eigen::Index slow = 0;
  for (const auto& c : couplings) {
    if (c.rows() != fast) throw ShapeError("coupling rows must match the fast state");
    slow += c.cols();
  }
  if (slow != slow_Q.rows() || fast_Q.rows() != fast) {
    throw ShapeError("coupling columns must match the slow composite state");
  }

  EpsilonBound out;
  out.weight = d;
  out.previous_scale = previous_scale;
  out.fast_Q = fast_Q;
  out.A = (1.0 - d) * 0.5 * (slow_Q + slow_Q.transpose());
  out.B.resize(slow, fast);
  Eigen::Index row = 0;
  for (const auto& c : couplings) {
    out.B.middleRows(row, c.cols()) = -d * (fast_P * c).transpose();
    row += c.cols();
  }

  const Eigen::LLT<Eigen::MatrixXd> llt(out.A);
  if (llt.info() != Eigen::Success || minSymmetricEigenvalue(out.A) <= 0.0) {
    throw DomainError("(1 - d) Q_slow is not positive definite");
  }
  Eigen::MatrixXd S = out.B.transpose() * llt.solve(out.B);
  S = 0.5 * (S + S.transpose()).eval();

  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> gen(S, fast_Q,
                                                                      Eigen::EigenvaluesOnly);
  const double lambda = gen.eigenvalues().maxCoeff();
  const double scale = std::max(1.0, fast_Q.cwiseAbs().maxCoeff());
  if (lambda <= 1e-14 * scale) {
    out.bound = cap;
    out.capped = true;
  } else {
    const double exact = d / (previous_scale * lambda);
    out.capped = exact > cap;
    out.bound = std::min(exact, cap);
  }
  out.determinant_diagnostic = out.A.determinant() * (d * fast_Q - S).determinant();
  out.min_eigenvalue_at_99 = minSymmetricEigenvalue(out.assemble(0.99 * out.bound));
  return out;
}

EpsilonBound epsilon1Bound(const Eigen::MatrixXd& Q_c, const Eigen::MatrixXd& P_r,
                           const Eigen::MatrixXd& Q_r, const Eigen::MatrixXd& A_rc, double d1,
                           double cap) {
  return compositeEpsilonBound(Q_c, d1, P_r, Q_r, {A_rc}, 1.0, cap);
}

EpsilonBound epsilon2Bound(const EpsilonBound& first, double eps1, const Eigen::MatrixXd& P_s,
                           const Eigen::MatrixXd& Q_s, const Eigen::MatrixXd& A_sr,
                           const Eigen::MatrixXd& A_sc, double d2, double cap) {
  if (!(eps1 > 0.0)) throw DomainError("epsilon_1 must be positive");
  return compositeEpsilonBound(first.assemble(eps1), d2, P_s, Q_s, {A_sc, A_sr}, eps1, cap);
}

std::vector<GridPoint> gridVerification(const EpsilonBound& bound,
                                        const std::vector<double>& multiples) {
  std::vector<GridPoint> out;
  out.reserve(multiples.size());
  for (double k : multiples) {
    const double eps = k * bound.bound;
    const double lo = minSymmetricEigenvalue(bound.assemble(eps));
    out.push_back({eps, lo, lo > 0.0});
  }
  return out;
}

EpsStar twoTimescaleEpsStar(const GrowthConstants& c) {
  if (!(c.alpha1 > 0.0) || !(c.alpha2 > 0.0)) {
    throw DomainError("alpha1 and alpha2 must be positive");
  }
  if (c.beta1 < 0.0 || c.beta2 < 0.0 || c.gamma < 0.0) {
    throw DomainError("beta1, beta2 and gamma must be nonnegative");
  }
  const double denom = c.alpha1 * c.gamma + c.beta1 * c.beta2;
  if (!(c.beta1 + c.beta2 > 0.0) || !(denom > 0.0)) {
    throw DomainError("degenerate growth constants: alpha1*gamma + beta1*beta2 and "
                      "beta1 + beta2 must be positive");
  }
  EpsStar out;
  out.eps_star = c.alpha1 * c.alpha2 / denom;
  out.d_star = c.beta1 / (c.beta1 + c.beta2);
  if (out.d_star > 0.0 && out.d_star < 1.0) out.eps_at_d_star = epsilonD(c, out.d_star);
  return out;
}

double epsilonD(const GrowthConstants& c, double d) {
  if (!(d > 0.0 && d < 1.0)) return 0.0;
  const double mix = (1.0 - d) * c.beta1 + d * c.beta2;
  return c.alpha1 * c.alpha2 / (c.alpha1 * c.gamma + mix * mix / (4.0 * d * (1.0 - d)));
}

bool quadraticFormNegative(const GrowthConstants& c, double eps, double d) {
  if (!(eps > 0.0)) return false;
  const double mix = (1.0 - d) * c.beta1 + d * c.beta2;
  return d * (1.0 - d) * c.alpha1 * (c.alpha2 / eps - c.gamma) > 0.25 * mix * mix;
}

bool StabilityReport::allHurwitz() const {
  for (const auto& l : levels) {
    if (!l.verdict.hurwitz) return false;
  }
  return true;
}

namespace {

// Unscaled base gains K_f1, K_f2 per row of a level.
std::pair<Eigen::VectorXd, Eigen::VectorXd> baseGains(const EffectiveGains& gains,
                                                      const Level& level) {
  const double s = level.scale;
  return {level.rows.of(gains.proportional) * s * s, level.rows.of(gains.derivative) * s};
}

}  // namespace

StabilityReport analyzeStability(const ControllerConfig& config, const GroupLayout& layout,
                                 const StabilityOptions& options) {
  const EffectiveGains gains = scaledGains(config, layout);

  // Slowest first: c, r, then intra levels from slowest to fastest.
  std::vector<Level> chain(gains.levels.rbegin(), gains.levels.rend());

  StabilityReport report;
  report.growth = options.growth;
  if (options.growth) report.eps_star = twoTimescaleEpsStar(*options.growth);

  std::vector<Eigen::MatrixXd> P(chain.size());
  std::vector<Eigen::MatrixXd> Q(chain.size());
  for (std::size_t k = 0; k < chain.size(); ++k) {
    const auto [k1, k2] = baseGains(gains, chain[k]);
    const Eigen::MatrixXd A = companionMatrix(k1, k2);
    LevelCertificate lc{chain[k].name, hurwitzCheck(A), std::nullopt};
    Q[k] = Eigen::MatrixXd::Identity(A.rows(), A.rows());
    if (lc.verdict.hurwitz) {
      lc.certificate = solveLyapunov(A, Q[k]);
      P[k] = lc.certificate->P;
    }
    report.levels.push_back(std::move(lc));
  }
  if (!report.allHurwitz()) return report;

  Eigen::MatrixXd slow_Q = Q[0];
  double slow_scale = chain[0].scale;
  for (std::size_t k = 1; k < chain.size(); ++k) {
    const Level& fast = chain[k];
    std::vector<Eigen::MatrixXd> couplings;
    for (std::size_t j = 0; j < k; ++j) {
      couplings.push_back(couplingInput(gains.couplingBlock(fast.name, chain[j].name)));
    }
    const double d = k - 1 < options.weights.size() ? options.weights[k - 1] : 0.5;

    ChainStep step;
    step.fast_level = fast.name;
    step.configured = fast.scale / chain[k - 1].scale;
    step.parameter = k <= config.epsilons.size() && layout.groups() > 1
                         ? "epsilon_" + std::to_string(k)
                         : "sigma_" + fast.name + "/sigma_" + chain[k - 1].name;
    step.bound = compositeEpsilonBound(slow_Q, d, P[k], Q[k], couplings, slow_scale,
                                       options.epsilon_cap);
    step.admissible = step.configured < step.bound.bound * (1.0 - 1e-9);
    step.evaluated = step.admissible ? step.configured
                                     : options.fallback_fraction * step.bound.bound;
    step.grid = gridVerification(step.bound, {0.1, 0.5, 0.99, 2.0, 10.0});

    slow_Q = step.bound.assemble(step.evaluated);
    slow_scale *= step.evaluated;
    report.chain.push_back(std::move(step));
  }
  return report;
}

}  // namespace mtsf
