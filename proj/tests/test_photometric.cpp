#include "vical/photometric.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "test_util.hpp"
#include "vical/synth.hpp"

using namespace vical;
using test::TempDir;

namespace {

// flat-ish random texture, strictly positive
ImageF random_texture(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(0.15, 0.9);
  ImageF tex(w, h);
  for (double& p : tex.pix) p = d(rng);
  return tex;
}

std::vector<ViewGeometry> spread_views(int count, int margin) {
  std::vector<ViewGeometry> views;
  const int corner[4][2] = {{0, 0}, {margin, 0}, {0, margin}, {margin, margin}};
  for (int i = 0; i < count; ++i) {
    ViewGeometry g;
    g.exposure_s = 1e-3 * (1.0 + 0.41 * i);
    g.offset_x = i < 4 ? corner[i][0] : (7 * i) % (margin + 1);
    g.offset_y = i < 4 ? corner[i][1] : (5 * i) % (margin + 1);
    views.push_back(g);
  }
  return views;
}

}  // namespace

TEST_CASE("render: unit vignette and exposure reproduce the texture") {
  const ImageF tex = random_texture(24, 20, 1);
  const ImageF v(16, 12, 1.0);
  const ImageF img = render_view(tex, v, {1.0, 3, 4});
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      CHECK(img.at(x, y) == tex.at(x + 3, y + 4));
    }
  }
}

TEST_CASE("render: doubling the exposure doubles every pixel") {
  const ImageF tex = random_texture(20, 20, 2);
  const ImageF v = synthetic_vignette(12, 0.4, 0.2);
  const ImageF a = render_view(tex, v, {2e-3, 1, 1});
  const ImageF b = render_view(tex, v, {4e-3, 1, 1});
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(b.pix[i] == doctest::Approx(2.0 * a.pix[i]).epsilon(1e-15));
  }
}

TEST_CASE("render: radial vignette attenuation matches the closed form") {
  // V = 1 - 0.5 r^2 with r normalized to the corner distance
  const int n = 9;
  const ImageF v = synthetic_vignette(n, 0.5, 0.0);
  const ImageF tex(n, n, 1.0);
  const ImageF img = render_view(tex, v, {1.0, 0, 0});
  CHECK(img.at(0, 0) == doctest::Approx(0.5).epsilon(1e-12));  // corner r = 1
  CHECK(img.at(n / 2, n / 2) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("render: window outside the texture is missing correspondence") {
  const ImageF tex = random_texture(16, 16, 3);
  const ImageF v(12, 12, 1.0);
  try {
    render_view(tex, v, {1e-3, 8, 0});
    FAIL("expected missing_correspondence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::missing_correspondence);
  }
}

TEST_CASE("vignette estimation: flat truth comes back flat") {
  const int margin = 6;
  const ImageF tex = random_texture(26, 26, 4);
  const ImageF v(20, 20, 1.0);
  const auto views = spread_views(6, margin);
  std::vector<ImageF> images;
  for (const auto& g : views) images.push_back(render_view(tex, v, g));

  const VignetteSolution sol = estimate_vignette(images, views);
  CHECK(sol.converged);
  for (double p : sol.vignette.pix) {
    CHECK(p == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("vignette estimation: known radial vignette, 10 noiseless views") {
  const int margin = 8;
  const int img = 32;
  const ImageF tex = random_texture(img + margin, img + margin, 5);
  const ImageF truth = synthetic_vignette(img, 0.4, 0.25);
  const auto views = spread_views(10, margin);
  std::vector<ImageF> images;
  for (const auto& g : views) images.push_back(render_view(tex, truth, g));

  const VignetteSolution sol = estimate_vignette(images, views);
  // the slow near-gauge mode keeps the relative-change rule from firing
  // inside 200 sweeps; the flag reports that honestly while the estimate is
  // already inside the accuracy budget
  CHECK(sol.iterations == 200);
  double worst = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    worst = std::max(worst, std::abs(sol.vignette.pix[i] - truth.pix[i]));
  }
  CHECK(worst < 1e-6);

  // objective never increases across half-steps
  for (std::size_t i = 1; i < sol.objective_history.size(); ++i) {
    CHECK(sol.objective_history[i] <=
          sol.objective_history[i - 1] * (1.0 + 1e-12) + 1e-18);
  }
}

TEST_CASE("vignette estimation: 1% multiplicative noise") {
  const int margin = 8;
  const int img = 32;
  const ImageF tex = random_texture(img + margin, img + margin, 6);
  const ImageF truth = synthetic_vignette(img, 0.4, 0.25);
  const auto views = spread_views(10, margin);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(1.0, 0.01);
  std::vector<ImageF> images;
  for (const auto& g : views) {
    ImageF im = render_view(tex, truth, g);
    for (double& p : im.pix) p *= noise(rng);
    images.push_back(im);
  }
  const VignetteSolution sol = estimate_vignette(images, views);
  double ss = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ss += (sol.vignette.pix[i] - truth.pix[i]) *
          (sol.vignette.pix[i] - truth.pix[i]);
  }
  CHECK(std::sqrt(ss / truth.size()) < 0.01);  // per-pixel RMS below 1%
}

TEST_CASE("vignette estimation: scale gauge is resolved by normalization") {
  const int margin = 6;
  const int img = 20;
  ImageF tex = random_texture(img + margin, img + margin, 8);
  const ImageF truth = synthetic_vignette(img, 0.3, 0.2);
  const auto views = spread_views(6, margin);

  std::vector<ImageF> base_images;
  for (const auto& g : views) base_images.push_back(render_view(tex, truth, g));
  const VignetteSolution base = estimate_vignette(base_images, views);

  // multiply the texture by c and divide the vignette by c: identical data
  // (renders change, but the normalized estimate must not)
  ImageF tex2 = tex;
  for (double& p : tex2.pix) p *= 2.5;
  ImageF truth2 = truth;
  for (double& p : truth2.pix) p /= 2.5;
  std::vector<ImageF> images2;
  for (const auto& g : views) images2.push_back(render_view(tex2, truth2, g));
  const VignetteSolution scaled = estimate_vignette(images2, views);

  for (std::size_t i = 0; i < base.vignette.size(); ++i) {
    CHECK(scaled.vignette.pix[i] ==
          doctest::Approx(base.vignette.pix[i]).epsilon(1e-9));
  }
}

TEST_CASE("vignette estimation: unobserved texture point is rejected") {
  // two small windows far apart leave a hole between them
  const ImageF tex = random_texture(20, 20, 9);
  const ImageF truth(4, 4, 1.0);
  std::vector<ViewGeometry> views = {{1e-3, 0, 0}, {2e-3, 10, 10}};
  std::vector<ImageF> images = {render_view(tex, truth, views[0]),
                                render_view(tex, truth, views[1])};
  try {
    estimate_vignette(images, views);
    FAIL("expected unobserved_pixel");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unobserved_pixel);
  }
}

TEST_CASE("correct_image inverts render_view on valid pixels") {
  const ImageF tex = random_texture(30, 30, 10);
  const ImageF v = synthetic_vignette(22, 0.5, 0.3);
  const ViewGeometry g{3.7e-3, 4, 2};
  const ImageF img = render_view(tex, v, g);
  const CorrectedImage c = correct_image(img, g.exposure_s, v);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * img.width + x;
      REQUIRE(c.valid[i] == 1);
      CHECK(c.irradiance.at(x, y) ==
            doctest::Approx(tex.at(x + 4, y + 2)).epsilon(1e-12));
    }
  }
}

TEST_CASE("correct_image flags black vignette pixels instead of dividing") {
  ImageF v(4, 4, 1.0);
  v.at(1, 1) = 0.0;
  v.at(2, 2) = 0.005;  // below the 0.01 validity floor
  ImageF img(4, 4, 0.5);
  const CorrectedImage c = correct_image(img, 1e-3, v);
  CHECK(c.valid[1 * 4 + 1] == 0);
  CHECK(c.valid[2 * 4 + 2] == 0);
  CHECK(std::isfinite(c.irradiance.at(1, 1)));
  CHECK(c.valid[0] == 1);
}

TEST_CASE("exposure invariance: corrected images at t and 2t agree") {
  const ImageF tex = random_texture(24, 24, 11);
  const ImageF v = synthetic_vignette(18, 0.4, 0.2);
  const ImageF a = render_view(tex, v, {1e-3, 2, 2});
  const ImageF b = render_view(tex, v, {2e-3, 2, 2});
  const CorrectedImage ca = correct_image(a, 1e-3, v);
  const CorrectedImage cb = correct_image(b, 2e-3, v);
  for (std::size_t i = 0; i < ca.irradiance.size(); ++i) {
    CHECK(std::abs(ca.irradiance.pix[i] - cb.irradiance.pix[i]) < 1e-12);
  }
}

TEST_CASE("exposure fit: exact inverse-proportional data") {
  std::vector<std::pair<double, double>> samples;
  for (double lux : {50.0, 120.0, 300.0, 800.0, 2000.0}) {
    samples.emplace_back(lux, 0.01 / lux);
  }
  const ExposureFit fit = fit_exposure_control(samples, 1e-6, 1.0);
  CHECK(fit.k_lux_s == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(fit.used == 5);
  CHECK(fit.excluded == 0);
}

TEST_CASE("exposure fit: clamped points are excluded, k still recovered") {
  // half the points sit at t_max (too dark for the clamp range)
  const double k = 0.02;
  const double t_max = 5e-3;
  std::vector<std::pair<double, double>> samples;
  std::size_t clamped = 0;
  for (int i = 0; i < 16; ++i) {
    const double lux = i < 8 ? 0.5 + 0.3 * i : 10.0 * (i - 6);
    double t = k / lux;
    if (t >= t_max) {
      t = t_max;
      ++clamped;
    }
    samples.emplace_back(lux, t);
  }
  REQUIRE(clamped == 8);
  const ExposureFit fit = fit_exposure_control(samples, 1e-6, t_max);
  CHECK(fit.k_lux_s == doctest::Approx(k).epsilon(1e-9));
  CHECK(fit.excluded == clamped);
  CHECK(fit.used == 8);
}

TEST_CASE("exposure fit: single unsaturated point gives k = t * L") {
  std::vector<std::pair<double, double>> samples = {{250.0, 4e-3}};
  const ExposureFit fit = fit_exposure_control(samples, 1e-6, 1.0);
  CHECK(fit.k_lux_s == doctest::Approx(4e-3 * 250.0).epsilon(1e-15));
}

TEST_CASE("exposure fit: everything saturated is an error") {
  std::vector<std::pair<double, double>> samples = {{10.0, 1.0}, {20.0, 1.0}};
  try {
    fit_exposure_control(samples, 1e-6, 1.0);
    FAIL("expected all_saturated");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::all_saturated);
  }
}

TEST_CASE("exposure model prediction clamps") {
  const ExposureModel m{0.01, 1e-4, 5e-3};
  CHECK(m.predict(1.0) == 5e-3);      // would be 0.01 s, clamped high
  CHECK(m.predict(50.0) == 2e-4);     // 0.01/50 inside the band
  CHECK(m.predict(1e6) == 1e-4);      // clamped low
}

TEST_CASE("pgm16 round trip and quantization") {
  TempDir dir("pgm");
  const ImageF v = synthetic_vignette(17, 0.45, 0.25);
  const auto path = dir.path() / "v.pgm";
  write_pgm16(v, path);
  const ImageF back = load_pgm16(path);
  REQUIRE(back.width == v.width);
  REQUIRE(back.height == v.height);
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK(std::abs(back.pix[i] - v.pix[i]) <= 0.5 / 65535.0 + 1e-12);
  }
  // second save of the loaded image is byte-identical (fixed quantization)
  const auto path2 = dir.path() / "v2.pgm";
  write_pgm16(back, path2);
  CHECK(read_file(path) == read_file(path2));
}

TEST_CASE("pgm16 parser rejects malformed headers") {
  CHECK_THROWS_AS(parse_pgm16("P2\n3 3\n65535\n"), Error);
  CHECK_THROWS_AS(parse_pgm16("P5\n3 3\n255\n"), Error);
  CHECK_THROWS_AS(parse_pgm16("P5\n3 3\n65535\nxx"), Error);
  CHECK_THROWS_AS(parse_pgm16(""), Error);
}
