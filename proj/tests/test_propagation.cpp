#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "lio/errors.hpp"
#include "lio/propagation.hpp"
#include "test_helpers.hpp"

using namespace lio;
using lio::test::random_state;
using lio::test::random_vec3;

namespace {

ImuSample random_sample(Rng& rng, double t) {
  ImuSample u;
  u.t = t;
  u.w = random_vec3(rng, 2.0);
  u.a = random_vec3(rng, 8.0) + Vec3(0, 0, 9.81);
  return u;
}

std::vector<ImuSample> constant_imu(const Vec3& w, const Vec3& a, double t0,
                                    double t1, double rate) {
  std::vector<ImuSample> imu;
  for (double t = t0; t <= t1 + 1e-9; t += 1.0 / rate) {
    imu.push_back({t, w, a});
  }
  return imu;
}

}  // namespace

TEST_CASE("zero input, zero gravity leaves the state fixed") {
  NavState x;
  x.g.setZero();
  ImuSample u;  // zero rates
  const NavState y = propagate_mean(x, u, 0.01);
  CHECK(boxminus(y, x).norm() == 0.0);
  CHECK(y.t == doctest::Approx(0.01));
}

TEST_CASE("free fall under gravity from rest") {
  NavState x;  // identity pose, g = (0,0,-9.81)
  ImuSample u;
  const double dt = 0.02;
  const NavState y = propagate_mean(x, u, dt);
  CHECK((y.v - Vec3(0, 0, -9.81 * dt)).norm() < 1e-12);
  CHECK((y.p - Vec3(0, 0, -0.5 * 9.81 * dt * dt)).norm() < 1e-12);
}

TEST_CASE("stationary support: specific force cancels gravity") {
  NavState x;
  ImuSample u;
  u.a = Vec3(0, 0, 9.81);
  const NavState y = propagate_mean(x, u, 0.05);
  CHECK(y.v.norm() < 1e-12);
  CHECK(y.p.norm() < 1e-12);
  CHECK((y.R - Mat3::Identity()).norm() < 1e-15);
}

TEST_CASE("pure rotation integrates the gyro exactly") {
  NavState x;
  x.g.setZero();
  ImuSample u;
  u.w = Vec3(0.0, 0.0, M_PI);
  const NavState y = propagate_mean(x, u, 0.05);
  CHECK((y.R - so3_exp(Vec3(0, 0, M_PI * 0.05))).norm() < 1e-12);
}

TEST_CASE("gyro bias is subtracted before integration") {
  NavState x;
  x.g.setZero();
  x.bw = Vec3(0.1, -0.2, 0.3);
  ImuSample u;
  u.w = x.bw;  // measured rate equals bias: no rotation
  const NavState y = propagate_mean(x, u, 0.1);
  CHECK((y.R - Mat3::Identity()).norm() < 1e-14);
}

TEST_CASE("transition Jacobian matches finite differences, 100 configs") {
  Rng rng(101);
  int worst_checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const NavState x = random_state(rng);
    const ImuSample u = random_sample(rng, x.t);
    const double dt = rng.uniform(0.002, 0.02);

    Mat18 F_p;
    Mat18x12 F_n;
    propagate_jacobians(x, u, dt, F_p, F_n);
    const NavState y0 = propagate_mean(x, u, dt);

    const double h = 1e-6;
    for (int c = 0; c < 18; ++c) {
      Vec18 dp = Vec18::Zero();
      dp(c) = h;
      const Vec18 plus = boxminus(propagate_mean(boxplus(x, dp), u, dt), y0);
      const Vec18 minus = boxminus(propagate_mean(boxplus(x, -dp), u, dt), y0);
      const Vec18 fd = (plus - minus) / (2.0 * h);
      const double denom = std::max(F_p.col(c).norm(), 1.0);
      CHECK((fd - F_p.col(c)).norm() / denom < 1e-5);
      ++worst_checked;
    }
  }
  CHECK(worst_checked == 1800);
}

TEST_CASE("noise Jacobian columns match injected-noise differences") {
  Rng rng(102);
  for (int trial = 0; trial < 20; ++trial) {
    const NavState x = random_state(rng);
    const ImuSample u = random_sample(rng, x.t);
    const double dt = 0.005;

    Mat18 F_p;
    Mat18x12 F_n;
    propagate_jacobians(x, u, dt, F_p, F_n);
    const NavState y0 = propagate_mean(x, u, dt);

    const double h = 1e-6;
    // Noise is modeled as subtracting from the measurement (same slot as the
    // bias), so injecting +h into the measured rate corresponds to n = -h.
    for (int c = 0; c < 3; ++c) {
      ImuSample up = u;
      up.w(c) += h;
      ImuSample um = u;
      um.w(c) -= h;
      const Vec18 fd = (boxminus(propagate_mean(x, up, dt), y0) -
                        boxminus(propagate_mean(x, um, dt), y0)) /
                       (2.0 * h);
      CHECK((fd + F_n.col(c)).norm() < 1e-5 * std::max(1.0, F_n.col(c).norm()));
    }
    // accel white noise
    for (int c = 0; c < 3; ++c) {
      ImuSample up = u;
      up.a(c) += h;
      ImuSample um = u;
      um.a(c) -= h;
      const Vec18 fd = (boxminus(propagate_mean(x, up, dt), y0) -
                        boxminus(propagate_mean(x, um, dt), y0)) /
                       (2.0 * h);
      CHECK((fd + F_n.col(3 + c)).norm() <
            1e-5 * std::max(1.0, F_n.col(3 + c).norm()));
    }
  }
}

TEST_CASE("process noise contributes sigma^2 dt on the bias blocks") {
  NoiseParams np;
  np.sigma_bw = 0.01;
  np.sigma_ba = 0.05;
  const double dt = 0.005;
  Rng rng(103);
  const NavState x = random_state(rng);
  const ImuSample u = random_sample(rng, x.t);
  Mat18 F_p;
  Mat18x12 F_n;
  propagate_jacobians(x, u, dt, F_p, F_n);
  const Mat12 q = process_noise(np, dt);
  const Mat18 add = F_n * q * F_n.transpose();
  CHECK(add(kGyroBiasBlock, kGyroBiasBlock) ==
        doctest::Approx(np.sigma_bw * np.sigma_bw * dt).epsilon(1e-9));
  CHECK(add(kAccBiasBlock, kAccBiasBlock) ==
        doctest::Approx(np.sigma_ba * np.sigma_ba * dt).epsilon(1e-9));
}

TEST_CASE("propagated covariance stays symmetric PSD over long horizons") {
  Rng rng(104);
  NavState x = random_state(rng);
  Mat18 P = Mat18::Identity() * 1e-4;
  NoiseParams np;
  for (int k = 0; k < 500; ++k) {
    const ImuSample u = random_sample(rng, x.t);
    const double dt = 0.005;
    Mat18 F_p;
    Mat18x12 F_n;
    propagate_jacobians(x, u, dt, F_p, F_n);
    P = propagate_covariance(P, F_p, F_n, process_noise(np, dt));
    x = propagate_mean(x, u, dt);
  }
  CHECK((P - P.transpose()).cwiseAbs().maxCoeff() < 1e-15);
  const Eigen::SelfAdjointEigenSolver<Mat18> es(P);
  CHECK(es.eigenvalues().minCoeff() > -1e-15);
  // noise must have grown the covariance (Loewner: P - P0 PSD up to F mixing)
  CHECK(P.trace() > 18 * 1e-4);
}

TEST_CASE("prior chain anchors include t_begin, strides, and t_end") {
  Rng rng(105);
  NavState x0;
  x0.t = 0.0;
  const auto imu = constant_imu(Vec3(0.1, 0, 0.2), Vec3(0, 0, 9.81), 0.0, 0.2,
                                200.0);
  NoiseParams np;
  const Mat18 P0 = Mat18::Identity() * 1e-4;
  const PriorChain chain =
      build_prior_chain(x0, P0, imu, 0.05, 0.15, 1, np);
  REQUIRE(chain.anchors.size() >= 3);
  CHECK(chain.anchors.front().state.t == doctest::Approx(0.05));
  CHECK(chain.anchors.back().state.t == doctest::Approx(0.15));
  for (size_t i = 1; i < chain.anchors.size(); ++i) {
    CHECK(chain.anchors[i].state.t > chain.anchors[i - 1].state.t);
  }
  CHECK(chain.anchors.front().F_step.isIdentity(0.0));
}

TEST_CASE("stride self-consistency: stride 3 end state equals stride 1") {
  NavState x0;
  const auto imu = constant_imu(Vec3(0.3, -0.1, 0.5), Vec3(0.4, 0.1, 9.7),
                                0.0, 0.3, 200.0);
  NoiseParams np;
  const Mat18 P0 = Mat18::Identity() * 1e-4;
  const PriorChain c1 = build_prior_chain(x0, P0, imu, 0.02, 0.28, 1, np);
  const PriorChain c3 = build_prior_chain(x0, P0, imu, 0.02, 0.28, 3, np);
  CHECK(c3.anchors.size() < c1.anchors.size());
  CHECK(boxminus(c3.anchors.back().state, c1.anchors.back().state).norm() <
        1e-12);
  CHECK((c3.anchors.back().P - c1.anchors.back().P).cwiseAbs().maxCoeff() <
        1e-12);
  // composed stride-1 transition equals the stride-3 product
  const Mat18 full1 =
      compose_transition(c1, 0, static_cast<int>(c1.anchors.size()) - 1);
  const Mat18 full3 =
      compose_transition(c3, 0, static_cast<int>(c3.anchors.size()) - 1);
  CHECK((full1 - full3).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("compose_transition of an empty range is identity") {
  NavState x0;
  const auto imu = constant_imu(Vec3::Zero(), Vec3(0, 0, 9.81), 0.0, 0.1,
                                200.0);
  NoiseParams np;
  const PriorChain chain =
      build_prior_chain(x0, Mat18::Identity() * 1e-4, imu, 0.0, 0.1, 1, np);
  CHECK(compose_transition(chain, 2, 2).isIdentity(0.0));
}

TEST_CASE("chain end state matches sample-by-sample mean propagation") {
  NavState x0;
  x0.v = Vec3(0.2, -0.1, 0.0);
  const auto imu = constant_imu(Vec3(0.0, 0.0, 1.0), Vec3(0.5, 0, 9.81), 0.0,
                                0.5, 100.0);
  NoiseParams np;
  const PriorChain chain = build_prior_chain(
      x0, Mat18::Identity() * 1e-4, imu, 0.0, 0.5, 2, np);
  // reference: hold each sample over [t_k, t_{k+1})
  NavState ref = x0;
  for (size_t k = 0; k + 1 < imu.size(); ++k) {
    const double t1 = std::min(imu[k + 1].t, 0.5);
    if (t1 <= ref.t) break;
    ref = propagate_mean(ref, imu[k], t1 - ref.t);
  }
  CHECK(boxminus(chain.anchors.back().state, ref).norm() < 1e-10);
}

TEST_CASE("IMU gap beyond the tolerance is rejected") {
  NavState x0;
  std::vector<ImuSample> imu = {{0.0, Vec3::Zero(), Vec3(0, 0, 9.81)},
                                {0.25, Vec3::Zero(), Vec3(0, 0, 9.81)}};
  NoiseParams np;
  CHECK_THROWS_AS(build_prior_chain(x0, Mat18::Identity() * 1e-4, imu, 0.0,
                                    0.25, 1, np),
                  InputError);
}
