#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "naim/lens.hpp"
#include "naim/rng.hpp"

using namespace naim;

namespace {

LatentCode code(std::vector<double> z) { return LatentCode{std::move(z)}; }

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double l2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Small dense tanh network: smooth everywhere, so the interpolation residual
// must shrink superlinearly with the endpoint distance.
struct TanhNet {
    std::vector<std::vector<double>> w1, w2;  // [hid][in], [out][hid]
    std::vector<double> b1, b2;

    TanhNet(int in, int hid, int out, uint64_t seed) {
        Rng rng(seed);
        w1.assign(hid, std::vector<double>(in));
        b1.assign(hid, 0.0);
        w2.assign(out, std::vector<double>(hid));
        b2.assign(out, 0.0);
        for (auto& row : w1)
            for (double& v : row) v = rng.uniform(-1.0, 1.0);
        for (double& v : b1) v = rng.uniform(-1.0, 1.0);
        for (auto& row : w2)
            for (double& v : row) v = rng.uniform(-1.0, 1.0);
        for (double& v : b2) v = rng.uniform(-1.0, 1.0);
    }

    std::vector<double> operator()(const std::vector<double>& x) const {
        std::vector<double> h(b1.size());
        for (size_t i = 0; i < h.size(); ++i) {
            double s = b1[i];
            for (size_t j = 0; j < x.size(); ++j) s += w1[i][j] * x[j];
            h[i] = std::tanh(s);
        }
        std::vector<double> y(b2.size());
        for (size_t i = 0; i < y.size(); ++i) {
            double s = b2[i];
            for (size_t j = 0; j < h.size(); ++j) s += w2[i][j] * h[j];
            y[i] = s;
        }
        return y;
    }
};

// Model whose image head is a bare affine map; tabular part is a single
// affine shape net so full predictions are easy to write down.
NaimModel affine_image_model(const std::vector<double>& w, double c) {
    MlpConfig ic;
    ic.in_dim = static_cast<int>(w.size());
    ic.out_dim = 1;
    ic.n_hidden = 0;
    Rng rng(3);
    NaimModel m;
    m.beta0 = 0.0;
    MlpConfig sc;
    sc.in_dim = 1;
    sc.out_dim = 1;
    sc.n_hidden = 0;
    m.shape_nets.push_back(make_mlp(sc, rng));
    m.shape_nets[0].W[0].fill(0.0);
    m.shape_nets[0].b[0].fill(0.0);
    m.shape_means = {0.0};
    m.image_head = make_mlp(ic, rng);
    for (size_t i = 0; i < w.size(); ++i) m.image_head.W[0].v[i] = w[i];
    m.image_head.b[0].v[0] = c;
    m.has_image_head = true;
    m.latent_dim = static_cast<int>(w.size());
    m.image_mean = 0.0;
    return m;
}

AeConfig tiny_ae_config() {
    AeConfig cfg;
    cfg.image_size = 8;
    cfg.channels = 1;
    cfg.latent_dim = 4;
    cfg.c1 = 4;
    cfg.c2 = 8;
    cfg.seed = 9;
    return cfg;
}

}  // namespace

TEST_CASE("interpolation_endpoints and midpoint") {
    LatentCode z = code({0.0, 0.0});
    LatentCode zp = code({2.0, 4.0});
    LatentSequence seq = interpolate_latents(z, zp, 3);
    REQUIRE(seq.k() == 3);
    CHECK(seq.kind == SequenceKind::interpolation);
    CHECK(seq.codes[0].z == z.z);
    CHECK(seq.codes[2].z == zp.z);
    CHECK(seq.codes[1].z[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(seq.codes[1].z[1] == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("interpolation_degenerate equal endpoints") {
    LatentCode z = code({0.7, -0.3, 1.1});
    LatentSequence seq = interpolate_latents(z, z, 5);
    for (const LatentCode& c : seq.codes)
        for (int j = 0; j < 3; ++j) CHECK(c.z[j] == doctest::Approx(z.z[j]).epsilon(1e-15));
}

TEST_CASE("interpolation_reversal symmetry") {
    Rng rng(11);
    LatentCode z, zp;
    for (int j = 0; j < 6; ++j) {
        z.z.push_back(rng.uniform(-2.0, 2.0));
        zp.z.push_back(rng.uniform(-2.0, 2.0));
    }
    LatentSequence fwd = interpolate_latents(z, zp, 7);
    LatentSequence rev = interpolate_latents(zp, z, 7);
    for (int i = 0; i < 7; ++i) CHECK(max_abs_diff(fwd.codes[i].z, rev.codes[6 - i].z) < 1e-12);
}

TEST_CASE("interpolation_argument validation") {
    LatentCode z = code({1.0, 2.0});
    CHECK_THROWS_AS(interpolate_latents(z, z, 1), std::invalid_argument);
    CHECK_THROWS_AS(interpolate_latents(z, code({1.0}), 3), std::invalid_argument);
}

TEST_CASE("manipulation_base point and scaled step") {
    LatentCode z = code({2.0, 0.0});
    LatentSequence seq = manipulate_latents(z, {0.0, 1.0}, 1.0, 2);
    REQUIRE(seq.k() == 2);
    CHECK(seq.kind == SequenceKind::manipulation);
    CHECK(seq.alpha == 1.0);
    CHECK(seq.codes[0].z == z.z);  // t = 0 leaves the base untouched
    // ||z|| = 2, ||v|| = 1, so the endpoint is z + 2 v = (2, 2).
    CHECK(seq.codes[1].z[0] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(seq.codes[1].z[1] == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("manipulation_is an interpolation toward its endpoint") {
    Rng rng(12);
    LatentCode z;
    std::vector<double> v;
    for (int j = 0; j < 5; ++j) {
        z.z.push_back(rng.uniform(-1.0, 1.0));
        v.push_back(rng.uniform(-1.0, 1.0));
    }
    const double alpha = 0.7;
    const int k = 9;
    LatentSequence man = manipulate_latents(z, v, alpha, k);

    const double scale = alpha * l2(z.z) / l2(v);
    LatentCode endpoint = z;
    for (int j = 0; j < 5; ++j) endpoint.z[j] += scale * v[j];
    LatentSequence inter = interpolate_latents(z, endpoint, k);
    for (int i = 0; i < k; ++i) CHECK(max_abs_diff(man.codes[i].z, inter.codes[i].z) < 1e-12);
}

TEST_CASE("manipulation_zero strength is a constant sequence") {
    LatentCode z = code({0.4, -0.6, 0.2});
    LatentSequence seq = manipulate_latents(z, {1.0, 1.0, 1.0}, 0.0, 4);
    for (const LatentCode& c : seq.codes) CHECK(max_abs_diff(c.z, z.z) == 0.0);
}

TEST_CASE("manipulation_argument validation") {
    LatentCode z = code({1.0, 2.0});
    CHECK_THROWS_AS(manipulate_latents(z, {0.0, 0.0}, 1.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(manipulate_latents(z, {1.0}, 1.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(manipulate_latents(z, {1.0, 0.0}, 1.0, 1), std::invalid_argument);
}

TEST_CASE("effect curve_zero image head is flat at zero") {
    AutoencoderModel ae = make_autoencoder(tiny_ae_config());
    NaimModel m = affine_image_model({0.0, 0.0, 0.0, 0.0}, 0.0);
    LatentSequence seq = interpolate_latents(code({0.0, 0.0, 0.0, 0.0}),
                                             code({1.0, 1.0, 1.0, 1.0}), 6);
    EffectCurve curve = effect_curve(m, ae, seq);
    REQUIRE(curve.k() == 6);
    REQUIRE(curve.images.size() == 6);
    REQUIRE(curve.t.size() == 6);
    CHECK(curve.t.front() == 0.0);
    CHECK(curve.t.back() == 1.0);
    for (double p : curve.prediction) CHECK(p == 0.0);
    for (const Image& im : curve.images) {
        CHECK(im.h == 8);
        CHECK(im.w == 8);
        CHECK(im.c == 1);
    }
}

TEST_CASE("effect curve_affine head with centering") {
    AutoencoderModel ae = make_autoencoder(tiny_ae_config());
    NaimModel m = affine_image_model({1.0, -2.0, 0.5, 0.0}, 0.25);
    m.image_mean = 0.1;
    LatentSequence seq = interpolate_latents(code({0.0, 0.0, 0.0, 0.0}),
                                             code({1.0, 1.0, 1.0, 1.0}), 3);
    EffectCurve curve = effect_curve(m, ae, seq);
    // w . z + 0.25 - 0.1 at z = 0, 0.5*(1,1,1,1), (1,1,1,1).
    CHECK(curve.prediction[0] == doctest::Approx(0.15).epsilon(1e-12));
    CHECK(curve.prediction[1] == doctest::Approx(-0.1).epsilon(1e-12));
    CHECK(curve.prediction[2] == doctest::Approx(-0.35).epsilon(1e-12));
}

TEST_CASE("effect curve_argument validation") {
    AutoencoderModel ae = make_autoencoder(tiny_ae_config());
    NaimModel m = affine_image_model({1.0, 1.0, 1.0}, 0.0);  // dim 3 != 4
    LatentSequence seq = interpolate_latents(code({0.0, 0.0, 0.0}), code({1.0, 1.0, 1.0}), 3);
    CHECK_THROWS_AS(effect_curve(m, ae, seq), std::invalid_argument);

    NaimModel tab;
    tab.beta0 = 1.0;
    CHECK_THROWS_AS(effect_curve(tab, ae, seq), std::invalid_argument);
}

TEST_CASE("global shift_zero alpha keeps the distribution") {
    AutoencoderModel ae = make_autoencoder(tiny_ae_config());
    NaimModel m = affine_image_model({1.0, 0.5, -0.25, 2.0}, 0.0);
    std::vector<Image> images(5, Image(8, 8, 1, 0.3));
    images[2] = Image(8, 8, 1, 0.9);
    Tensor x({5, 1}, 0.0);
    GlobalShift gs = global_shift(m, ae, images, x, {1.0, 0.0, 0.0, 0.0}, 0.0);
    REQUIRE(gs.base.size() == 5);
    for (int i = 0; i < 5; ++i) CHECK(gs.base[i] == gs.shifted[i]);
    CHECK(gs.base_mean == gs.shifted_mean);
}

TEST_CASE("global shift_affine head moves by the projected step") {
    AutoencoderModel ae = make_autoencoder(tiny_ae_config());
    const std::vector<double> w{1.0, -0.5, 0.25, 0.75};
    NaimModel m = affine_image_model(w, 0.0);
    std::vector<Image> images;
    Rng rng(13);
    for (int i = 0; i < 4; ++i) {
        Image im(8, 8, 1);
        for (double& p : im.px) p = rng.uniform();
        images.push_back(im);
    }
    Tensor x({4, 1}, 0.0);
    const std::vector<double> v{0.5, 0.5, -0.5, 0.5};
    const double alpha = 0.8;
    GlobalShift gs = global_shift(m, ae, images, x, v, alpha);

    Tensor codes = encode_batch(ae, images_to_batch(images, 0, 4));
    const double vn = l2(v);
    double wv = 0.0;
    for (int j = 0; j < 4; ++j) wv += w[j] * v[j];
    for (int i = 0; i < 4; ++i) {
        double zn = 0.0;
        for (int j = 0; j < 4; ++j) zn += codes.at(i, j) * codes.at(i, j);
        const double want = alpha * std::sqrt(zn) / vn * wv;
        CHECK(gs.shifted[i] - gs.base[i] == doctest::Approx(want).epsilon(1e-10));
    }

    // Reversing the direction reverses the mean shift for an affine head.
    std::vector<double> vneg{-0.5, -0.5, 0.5, -0.5};
    GlobalShift neg = global_shift(m, ae, images, x, vneg, alpha);
    CHECK(neg.shifted_mean - neg.base_mean ==
          doctest::Approx(-(gs.shifted_mean - gs.base_mean)).epsilon(1e-10));
}

TEST_CASE("global shift_argument validation") {
    AutoencoderModel ae = make_autoencoder(tiny_ae_config());
    NaimModel m = affine_image_model({1.0, 0.0, 0.0, 0.0}, 0.0);
    Tensor x({1, 1}, 0.0);
    CHECK_THROWS_AS(global_shift(m, ae, {}, x, {1.0, 0.0, 0.0, 0.0}, 1.0),
                    std::invalid_argument);
    std::vector<Image> images{Image(8, 8, 1, 0.5)};
    CHECK_THROWS_AS(global_shift(m, ae, images, x, {0.0, 0.0, 0.0, 0.0}, 1.0),
                    std::invalid_argument);
    Tensor bad({3, 1}, 0.0);
    CHECK_THROWS_AS(global_shift(m, ae, images, bad, {1.0, 0.0, 0.0, 0.0}, 1.0),
                    std::invalid_argument);
}

TEST_CASE("residual_affine functions interpolate exactly") {
    auto h = [](const std::vector<double>& x) {
        return std::vector<double>{2.0 * x[0] - x[1] + 0.5, 0.25 * x[0] + 3.0 * x[1] - 1.0};
    };
    const std::vector<double> z{0.3, -0.7};
    const std::vector<double> zt{-1.2, 2.4};
    for (double lambda : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        std::vector<double> r = convexity_residual(h, z, zt, lambda);
        REQUIRE(r.size() == 2);
        CHECK(l2(r) < 1e-10);
    }
}

TEST_CASE("residual_quadratic closed form") {
    auto h = [](const std::vector<double>& x) { return std::vector<double>{x[0] * x[0]}; };
    std::vector<double> r = convexity_residual(h, {0.0}, {1.0}, 0.5);
    REQUIRE(r.size() == 1);
    CHECK(r[0] == doctest::Approx(-0.5).epsilon(1e-12));

    // lambda = 1: the scaled residual term vanishes identically.
    r = convexity_residual(h, {0.0}, {1.0}, 1.0);
    CHECK(r[0] == 0.0);
}

TEST_CASE("residual_shrinks superlinearly for smooth networks") {
    TanhNet h(3, 16, 2, 21);
    Rng rng(22);
    int wins = 0;
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> z(3), u(3);
        for (double& v : z) v = rng.uniform(-1.0, 1.0);
        double un = 0.0;
        for (double& v : u) {
            v = rng.normal();
            un += v * v;
        }
        un = std::sqrt(un);
        for (double& v : u) v /= un;

        auto ratio_at = [&](double eps) {
            std::vector<double> zt(3);
            for (int j = 0; j < 3; ++j) zt[j] = z[j] + eps * u[j];
            return l2(convexity_residual(h, z, zt, 0.5)) / eps;
        };
        if (ratio_at(1e-2) * 4.0 <= ratio_at(1e-1)) ++wins;
    }
    // o(||z - zt||): the per-distance residual must keep shrinking with eps.
    CHECK(wins >= 9);
}

TEST_CASE("residual_argument validation") {
    auto h = [](const std::vector<double>& x) { return x; };
    CHECK_THROWS_AS(convexity_residual(h, {0.0}, {1.0}, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(convexity_residual(h, {0.0}, {1.0}, 1.1), std::invalid_argument);
    CHECK_THROWS_AS(convexity_residual(h, {0.0, 1.0}, {1.0}, 0.5), std::invalid_argument);
}

TEST_CASE("emission_csv and strip round trip") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "naim_lens_test";
    fs::create_directories(dir);

    AutoencoderModel ae = make_autoencoder(tiny_ae_config());
    NaimModel m = affine_image_model({1.0, 0.0, 0.0, 0.0}, 0.0);
    LatentSequence seq = interpolate_latents(code({0.0, 0.0, 0.0, 0.0}),
                                             code({1.0, 0.0, 0.0, 0.0}), 4);
    EffectCurve curve = effect_curve(m, ae, seq);

    const std::string csv = (dir / "curve.csv").string();
    write_effect_curve_csv(curve, csv);
    std::ifstream in(csv);
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line);
    CHECK(line == "index,t,prediction");
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 4);

    curve.reference = {0.0, 0.1, 0.2, 0.3};
    write_effect_curve_csv(curve, csv);
    std::ifstream in2(csv);
    std::getline(in2, line);
    CHECK(line == "index,t,prediction,reference");

    const std::string strip = (dir / "strip.png").string();
    write_sequence_strip(curve, strip);
    Image loaded = read_png(strip);
    CHECK(loaded.h == 8);
    CHECK(loaded.w == 32);  // four 8-pixel panels side by side

    curve.reference = {0.0};
    CHECK_THROWS_AS(write_effect_curve_csv(curve, csv), std::invalid_argument);
    fs::remove_all(dir);
}
