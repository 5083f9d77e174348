#include "doctest.h"

#include "nemclock/errors.hpp"
#include "nemclock/transport.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace nemclock;

namespace {

double rel(double a, double b) {
    return std::abs(a - b) / std::abs(b);
}

} // namespace

TEST_CASE("fermi_dirac") {
    CHECK(fermi_dirac(3.0, 3.0, 0.7) == 0.5);
    CHECK(fermi_dirac(std::log(3.0), 0.0, 1.0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(fermi_dirac(1e4, 0.0, 1.0) == 0.0);
    CHECK(fermi_dirac(-1e4, 0.0, 1.0) == 1.0);
    CHECK(std::isfinite(fermi_dirac(1e308, -1e308, 1e10)));
}

TEST_CASE("spectral_density of the reference lead") {
    const LeadSpec lead{2.5, 5.0, 10.0, 0.0};
    CHECK(spectral_density(2.5, lead) == 10.0);
    CHECK(spectral_density(7.5, lead) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(spectral_density(-2.5, lead) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(spectral_density(0.0, lead) == doctest::Approx(8.0).epsilon(1e-15));
}

TEST_CASE("lead_self_energy") {
    const LeadSpec lead{2.5, 5.0, 10.0, 0.0};
    const auto at_center = lead_self_energy(2.5, lead);
    CHECK(at_center.real() == 0.0);
    CHECK(at_center.imag() == doctest::Approx(-5.0).epsilon(1e-15));

    for (double e : {-40.0, -3.0, 0.0, 1.7, 9.0, 120.0}) {
        CHECK(lead_self_energy(e, lead).imag() == -0.5 * spectral_density(e, lead));
        // closed form against the principal-value definition
        const auto pv = oracle::self_energy_pv(e, lead.band_center, lead.bandwidth, lead.peak_rate);
        CHECK(lead_self_energy(e, lead).real() == doctest::Approx(pv.real()).epsilon(1e-9));
    }

    const LeadSpec wide{0.0, 1e6, 10.0, 0.0};
    const auto w = lead_self_energy(3.0, wide);
    CHECK(std::abs(w.real()) < 1e-4);
    CHECK(w.imag() == doctest::Approx(-5.0).epsilon(1e-9));
}

TEST_CASE("transmission") {
    const SystemParams p = SystemParams::reference_device(100.0);
    // the symmetric device is exactly resonant at E = 0, x = 0 with kappa_L = kappa_R
    CHECK(transmission(0.0, 0.0, p) == doctest::Approx(1.0).epsilon(1e-14));
    // reference value from self-energies obtained by principal-value quadrature
    CHECK(transmission(3.0, 1.0, p) == doctest::Approx(0.856727527876307346).epsilon(1e-12));

    SystemParams closed = p;
    closed.right.peak_rate = 0.0;
    CHECK(transmission(0.3, 0.0, closed) == 0.0);

    for (double x : {-30.0, -3.0, 0.0, 5.0, 40.0}) {
        for (double e = -200.0; e <= 200.0; e += 0.37) {
            const double t = transmission(e, x, p);
            CHECK(t >= 0.0);
            CHECK(t <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("conditional_occupation") {
    SUBCASE("particle-hole symmetric point") {
        for (double v : {0.0, 10.0, 100.0}) {
            CHECK(conditional_occupation(0.0, SystemParams::reference_device(v)).total ==
                  doctest::Approx(0.5).epsilon(1e-8));
        }
    }
    SUBCASE("no coupling means no excess") {
        SystemParams p = SystemParams::reference_device(100.0);
        p.coupling = 0.0;
        for (double x : {-7.0, 0.5, 30.0}) {
            CHECK(conditional_occupation(x, p).excess == 0.0);
        }
    }
    SUBCASE("refinement oracle at V = 100, x = 1") {
        const auto occ = conditional_occupation(1.0, SystemParams::reference_device(100.0));
        CHECK(occ.total == doctest::Approx(0.488299988705048450).epsilon(1e-8));
        CHECK(occ.excess == doctest::Approx(-0.0117000112949515496).epsilon(1e-6));
    }
}

TEST_CASE("conditional_current") {
    const QuadratureSettings q;
    for (double x : {-5.0, 0.0, 2.0}) {
        CHECK(std::abs(conditional_current(x, SystemParams::reference_device(0.0), q)) < q.relative_tolerance);
    }

    SystemParams p = SystemParams::reference_device(37.0);
    SystemParams swapped = p;
    std::swap(swapped.left.chemical_potential, swapped.right.chemical_potential);
    const double i = conditional_current(1.3, p);
    CHECK(i > 0.0);
    CHECK(conditional_current(1.3, swapped) == doctest::Approx(-i).epsilon(1e-12));

    CHECK(conditional_current(0.0, SystemParams::reference_device(100.0)) ==
          doctest::Approx(4.37722289766105578).epsilon(1e-8));

    SUBCASE("sign of F only enters through F x") {
        SystemParams flipped = p;
        flipped.coupling = -p.coupling;
        for (double x : {0.4, 3.0, 11.0}) {
            CHECK(conditional_current(x, p) == conditional_current(-x, flipped));
        }
    }
    SUBCASE("symmetric device gives an even current") {
        for (double x : {0.4, 3.0, 11.0}) {
            CHECK(conditional_current(x, p) == doctest::Approx(conditional_current(-x, p)).epsilon(1e-9));
        }
    }
}

TEST_CASE("conditional_shot_noise") {
    SystemParams cold = SystemParams::reference_device(0.0);
    cold.inverse_temperature = 1e6;
    // only the thermal term (4/pi) T tau(0) survives
    CHECK(conditional_shot_noise(0.0, cold) == doctest::Approx(4e-6 / std::numbers::pi).epsilon(1e-6));

    // very wide bands and a large rate make tau ~ 1 - (E/Gamma)^2 inside a narrow bias window
    SystemParams open = SystemParams::reference_device(1.0);
    open.left = LeadSpec{0.0, 1e6, 1e4, 0.5};
    open.right = LeadSpec{0.0, 1e6, 1e4, -0.5};
    open.inverse_temperature = 1e6;
    const auto terms = conditional_shot_noise_terms(0.0, open);
    CHECK(terms.partition >= 0.0);
    CHECK(terms.partition < 1e-8);

    for (double v : {0.0, 5.0, 50.0, 100.0}) {
        for (double x : {-20.0, 0.0, 7.0}) {
            CHECK(conditional_shot_noise(x, SystemParams::reference_device(v)) >= 0.0);
        }
    }
    CHECK(conditional_shot_noise(0.0, SystemParams::reference_device(50.0)) ==
          doctest::Approx(2.68248907484522581).epsilon(1e-8));
}

TEST_CASE("charge_noise_spectrum") {
    SUBCASE("detailed balance in equilibrium") {
        QuadratureSettings tight;
        tight.relative_tolerance = 1e-9;
        const SystemParams p = SystemParams::reference_device(0.0);
        for (double x : {0.0, 2.0}) {
            for (double w : {0.5, 1.0, 2.0}) {
                const double plus = charge_noise_spectrum(x, w, p, tight);
                const double minus = charge_noise_spectrum(x, -w, p, tight);
                CHECK(std::abs(minus - std::exp(-p.inverse_temperature * w) * plus) / plus < 1e-6);
            }
        }
    }
    SUBCASE("quadratic in F") {
        SystemParams p = SystemParams::reference_device(20.0);
        const double s1 = charge_noise_spectrum(0.0, 0.3, p);
        p.coupling *= 2.0;
        CHECK(charge_noise_spectrum(0.0, 0.3, p) == doctest::Approx(4.0 * s1).epsilon(1e-13));
    }
    SUBCASE("refinement oracle at V = 100") {
        CHECK(charge_noise_spectrum(0.0, 0.0, SystemParams::reference_device(100.0)) ==
              doctest::Approx(0.0149801966556227697).epsilon(1e-8));
    }
}

TEST_CASE("friction_and_diffusion") {
    SUBCASE("fluctuation-dissipation close to equilibrium") {
        const SystemParams p = SystemParams::reference_device(0.1);
        const double x_zp = p.zero_point_length();
        for (double x : {-2.0 * x_zp, -x_zp, 0.0, x_zp, 2.0 * x_zp}) {
            const auto fd = friction_and_diffusion(x, p);
            CHECK(fd.diffusion >= 0.0);
            const double bd = p.inverse_temperature * fd.diffusion;
            CHECK(std::abs(bd - 2.0 * p.oscillator_mass * fd.friction) / bd < 0.1);
        }
        // reference slope and spectrum from an independent high-precision evaluation
        const auto fd0 = friction_and_diffusion(0.0, p);
        CHECK(fd0.friction == doctest::Approx(0.000811937711935301).epsilon(1e-6));
        CHECK(fd0.diffusion == doctest::Approx(0.0162652563260934446).epsilon(1e-8));
    }
    SUBCASE("negative friction far above threshold") {
        const auto fd = friction_and_diffusion(0.0, SystemParams::reference_device(100.0));
        CHECK(fd.friction == doctest::Approx(-0.000483991735103455).epsilon(1e-5));
    }
    SUBCASE("stencil halving is converged") {
        for (double v : {0.1, 50.0, 100.0}) {
            const SystemParams p = SystemParams::reference_device(v);
            const double a = noise_spectrum_slope(0.0, 0.05, p);
            const double b = noise_spectrum_slope(0.0, 0.025, p);
            CHECK(std::abs(a - b) < 1e-3 * std::abs(b));
        }
    }
    SUBCASE("friction is positive in equilibrium") {
        for (double x : {-10.0, 0.0, 4.0}) {
            CHECK(friction_and_diffusion(x, SystemParams::reference_device(0.0)).friction > 0.0);
        }
    }
}

TEST_CASE("transport_point agrees with the individual operations") {
    const SystemParams p = SystemParams::reference_device(60.0);
    const double n0 = reference_occupation(p);
    const auto pt = transport_point(2.5, p, n0);
    CHECK(pt.current == conditional_current(2.5, p));
    CHECK(pt.shot_noise == conditional_shot_noise(2.5, p));
    CHECK(pt.excess_occupation == conditional_occupation(2.5, p).excess);
    const auto fd = friction_and_diffusion(2.5, p);
    CHECK(pt.friction == fd.friction);
    CHECK(pt.diffusion == fd.diffusion);
}

TEST_CASE("parameter validation and adiabatic warnings") {
    SystemParams p = SystemParams::reference_device(100.0);
    CHECK(p.adiabatic_warnings().empty());
    CHECK(!SystemParams::reference_device(1.0).adiabatic_warnings().empty());
    p.inverse_temperature = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = SystemParams::reference_device(1.0);
    p.left.bandwidth = -1.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}
