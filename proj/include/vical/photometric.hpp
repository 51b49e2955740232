#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "vical/core.hpp"

namespace vical {

// Real-valued image, row major, values nominally in [0,1]. 16-bit integer
// images are normalized by 65535 on load.
struct ImageF {
  int width = 0;
  int height = 0;
  std::vector<double> pix;

  ImageF() = default;
  ImageF(int w, int h, double fill = 0.0)
      : width(w), height(h), pix(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int x, int y) { return pix[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const {
    return pix[static_cast<std::size_t>(y) * width + x];
  }
  std::size_t size() const { return pix.size(); }
};

// 16-bit binary PGM (P5, maxval 65535), value = round(65535 * v).
ImageF parse_pgm16(std::string_view bytes);
ImageF load_pgm16(const std::filesystem::path& path);
void write_pgm16(const ImageF& img, const std::filesystem::path& path);

// Pixel (x, y) of a view observes plane point (x + offset_x, y + offset_y)
// of the target texture. Offsets come from the capture geometry and are
// inputs, not estimated.
struct ViewGeometry {
  double exposure_s = 0.0;
  int offset_x = 0;
  int offset_y = 0;
};

// Linear image formation: I(x) = t * V(x) * B(x), scale constant 1.
// Throws missing_correspondence if the view window leaves the texture.
ImageF render_view(const ImageF& texture, const ImageF& vignette,
                   const ViewGeometry& view);

// Calibration views on disk: views.csv (#view,exposure_ns,offset_x,offset_y)
// next to view_NNN.pgm images named by the view column.
struct VignetteViews {
  std::vector<ImageF> images;
  std::vector<ViewGeometry> views;
};
VignetteViews load_vignette_views(const std::filesystem::path& dir);

// Alternating least squares over the wall texture B (up to scale) and the
// non-parametric vignette V. Stops when the relative objective decrease
// drops below tol or after max_iterations. The result is normalized so
// max V = 1 and clamped to [0,1].
struct VignetteSolution {
  ImageF vignette;
  ImageF texture;
  int iterations = 0;
  bool converged = false;
  // Objective after every half-step (B update, then V update).
  std::vector<double> objective_history;
};
VignetteSolution estimate_vignette(const std::vector<ImageF>& images,
                                   const std::vector<ViewGeometry>& views,
                                   double tol = 1e-8, int max_iterations = 200);

// B_hat(x) = I(x) / (t V(x)); pixels with V < 0.01 are flagged invalid
// instead of blowing up.
struct CorrectedImage {
  ImageF irradiance;
  std::vector<std::uint8_t> valid;
};
CorrectedImage correct_image(const ImageF& image, double exposure_s,
                             const ImageF& vignette);

// Illuminance -> exposure-time control model t(L) = clamp(k / L, t_min, t_max).
struct ExposureModel {
  double k_lux_s = 0.0;
  double t_min_s = 0.0;
  double t_max_s = 0.0;

  double predict(double lux) const;
};

// Least-squares fit of k over unsaturated samples (t strictly inside
// [t_min, t_max]); samples at the clamp bounds are excluded. Throws
// all_saturated when nothing remains.
struct ExposureFit {
  double k_lux_s = 0.0;
  std::size_t used = 0;
  std::size_t excluded = 0;
};
ExposureFit fit_exposure_control(
    const std::vector<std::pair<double, double>>& lux_exposure_s,
    double t_min_s, double t_max_s);

}  // namespace vical
