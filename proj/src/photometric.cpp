#include "vical/photometric.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "vical/ingest.hpp"

namespace vical {

// ---------------------------------------------------------------------------
// 16-bit PGM (P5, maxval 65535, big-endian sample bytes)

namespace {

// Reads one whitespace-delimited ASCII token from a PGM header, honoring
// '#' comments.
std::string_view pgm_token(std::string_view& rest) {
  while (!rest.empty()) {
    const char c = rest.front();
    if (c == '#') {
      const auto nl = rest.find('\n');
      if (nl == std::string_view::npos) {
        fail(ErrorCode::parse, "pgm: unterminated comment");
      }
      rest.remove_prefix(nl + 1);
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      rest.remove_prefix(1);
    } else {
      break;
    }
  }
  std::size_t len = 0;
  while (len < rest.size() && !std::isspace(static_cast<unsigned char>(rest[len]))) {
    ++len;
  }
  if (len == 0) fail(ErrorCode::parse, "pgm: truncated header");
  const std::string_view tok = rest.substr(0, len);
  rest.remove_prefix(len);
  return tok;
}

long pgm_int(std::string_view& rest, const char* what) {
  const std::string_view tok = pgm_token(rest);
  long v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    fail(ErrorCode::parse, std::string("pgm: bad ") + what);
  }
  return v;
}

}  // namespace

ImageF parse_pgm16(std::string_view bytes) {
  std::string_view rest = bytes;
  if (pgm_token(rest) != "P5") fail(ErrorCode::parse, "pgm: expected P5 magic");
  const long w = pgm_int(rest, "width");
  const long h = pgm_int(rest, "height");
  const long maxval = pgm_int(rest, "maxval");
  if (w <= 0 || h <= 0 || w > 1 << 16 || h > 1 << 16) {
    fail(ErrorCode::parse, "pgm: bad dimensions");
  }
  if (maxval != 65535) fail(ErrorCode::parse, "pgm: expected maxval 65535");
  if (rest.empty() || !std::isspace(static_cast<unsigned char>(rest.front()))) {
    fail(ErrorCode::parse, "pgm: missing separator before raster");
  }
  rest.remove_prefix(1);
  const std::size_t need = static_cast<std::size_t>(w) * h * 2;
  if (rest.size() != need) {
    fail(ErrorCode::parse, "pgm: raster size mismatch");
  }
  ImageF img(static_cast<int>(w), static_cast<int>(h));
  for (std::size_t i = 0; i < img.size(); ++i) {
    const auto hi = static_cast<unsigned char>(rest[2 * i]);
    const auto lo = static_cast<unsigned char>(rest[2 * i + 1]);
    img.pix[i] = static_cast<double>((hi << 8) | lo) / 65535.0;
  }
  return img;
}

ImageF load_pgm16(const std::filesystem::path& path) {
  return parse_pgm16(read_file(path));
}

void write_pgm16(const ImageF& img, const std::filesystem::path& path) {
  if (img.width <= 0 || img.height <= 0) {
    fail(ErrorCode::invalid_argument, "cannot write empty image");
  }
  std::string out = "P5\n" + std::to_string(img.width) + " " +
                    std::to_string(img.height) + "\n65535\n";
  out.reserve(out.size() + img.size() * 2);
  for (double v : img.pix) {
    const double clamped = std::clamp(v, 0.0, 1.0);
    const auto q = static_cast<unsigned>(std::lround(clamped * 65535.0));
    out.push_back(static_cast<char>((q >> 8) & 0xff));
    out.push_back(static_cast<char>(q & 0xff));
  }
  write_file(path, out);
}

// ---------------------------------------------------------------------------
// Rendering and correction

ImageF render_view(const ImageF& texture, const ImageF& vignette,
                   const ViewGeometry& view) {
  if (view.exposure_s <= 0.0) {
    fail(ErrorCode::invalid_argument, "exposure must be positive");
  }
  if (view.offset_x < 0 || view.offset_y < 0 ||
      view.offset_x + vignette.width > texture.width ||
      view.offset_y + vignette.height > texture.height) {
    fail(ErrorCode::missing_correspondence,
         "view window leaves the texture: offset (" +
             std::to_string(view.offset_x) + ", " +
             std::to_string(view.offset_y) + ")");
  }
  ImageF img(vignette.width, vignette.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      img.at(x, y) = view.exposure_s * vignette.at(x, y) *
                     texture.at(x + view.offset_x, y + view.offset_y);
    }
  }
  return img;
}

CorrectedImage correct_image(const ImageF& image, double exposure_s,
                             const ImageF& vignette) {
  if (exposure_s <= 0.0) {
    fail(ErrorCode::invalid_argument, "exposure must be positive");
  }
  if (image.width != vignette.width || image.height != vignette.height) {
    fail(ErrorCode::invalid_argument, "image/vignette size mismatch");
  }
  CorrectedImage out;
  out.irradiance = ImageF(image.width, image.height);
  out.valid.assign(image.size(), 1);
  for (std::size_t i = 0; i < image.size(); ++i) {
    if (vignette.pix[i] < 0.01) {
      out.valid[i] = 0;
      out.irradiance.pix[i] = 0.0;
    } else {
      out.irradiance.pix[i] = image.pix[i] / (exposure_s * vignette.pix[i]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Alternating vignette / texture estimation

namespace {

struct Extent {
  int min_x = 0, min_y = 0, width = 0, height = 0;
};

double objective(const std::vector<ImageF>& images,
                 const std::vector<ViewGeometry>& views, const ImageF& tex,
                 const ImageF& vig, const Extent& ext) {
  double ss = 0.0;
  for (std::size_t v = 0; v < images.size(); ++v) {
    const double t = views[v].exposure_s;
    const int ox = views[v].offset_x - ext.min_x;
    const int oy = views[v].offset_y - ext.min_y;
    for (int y = 0; y < vig.height; ++y) {
      for (int x = 0; x < vig.width; ++x) {
        const double r =
            images[v].at(x, y) - t * vig.at(x, y) * tex.at(x + ox, y + oy);
        ss += r * r;
      }
    }
  }
  return ss;
}

}  // namespace

VignetteViews load_vignette_views(const std::filesystem::path& dir) {
  const std::string text = read_file(dir / "views.csv");
  VignetteViews out;
  std::size_t line_no = 0;
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    const std::string_view line =
        nl == std::string_view::npos ? rest : rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{}
                                        : rest.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "#view,exposure_ns,offset_x,offset_y") {
        fail(ErrorCode::parse, "views.csv: unexpected header");
      }
      continue;
    }
    long view = 0, exposure_ns = 0, ox = 0, oy = 0;
    const std::string row(line);
    if (std::sscanf(row.c_str(), "%ld,%ld,%ld,%ld", &view, &exposure_ns, &ox,
                    &oy) != 4 ||
        view < 0 || view > 999 || exposure_ns <= 0) {
      fail(ErrorCode::parse,
           "views.csv line " + std::to_string(line_no) + ": bad row");
    }
    char name[32];
    std::snprintf(name, sizeof(name), "view_%03ld.pgm", view);
    out.images.push_back(load_pgm16(dir / name));
    out.views.push_back(ViewGeometry{static_cast<double>(exposure_ns) * 1e-9,
                                     static_cast<int>(ox),
                                     static_cast<int>(oy)});
  }
  if (out.images.empty()) {
    fail(ErrorCode::empty_input, "views.csv lists no views");
  }
  return out;
}

VignetteSolution estimate_vignette(const std::vector<ImageF>& images,
                                   const std::vector<ViewGeometry>& views,
                                   double tol, int max_iterations) {
  if (images.size() < 2) {
    fail(ErrorCode::insufficient_data,
         "vignette estimation needs at least 2 views");
  }
  if (images.size() != views.size()) {
    fail(ErrorCode::invalid_argument, "images/views size mismatch");
  }
  const int w = images[0].width;
  const int h = images[0].height;
  Extent ext;
  ext.min_x = views[0].offset_x;
  ext.min_y = views[0].offset_y;
  int max_x = views[0].offset_x;
  int max_y = views[0].offset_y;
  for (std::size_t i = 0; i < views.size(); ++i) {
    if (images[i].width != w || images[i].height != h) {
      fail(ErrorCode::invalid_argument, "views differ in image size");
    }
    if (views[i].exposure_s <= 0.0) {
      fail(ErrorCode::invalid_argument, "exposure must be positive");
    }
    ext.min_x = std::min(ext.min_x, views[i].offset_x);
    ext.min_y = std::min(ext.min_y, views[i].offset_y);
    max_x = std::max(max_x, views[i].offset_x);
    max_y = std::max(max_y, views[i].offset_y);
  }
  ext.width = max_x - ext.min_x + w;
  ext.height = max_y - ext.min_y + h;

  // Coverage: every texture point must be seen at least once. (Every
  // vignette pixel is seen in every full-frame view.)
  {
    ImageF seen(ext.width, ext.height, 0.0);
    for (const auto& view : views) {
      const int ox = view.offset_x - ext.min_x;
      const int oy = view.offset_y - ext.min_y;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) seen.at(x + ox, y + oy) = 1.0;
      }
    }
    for (int y = 0; y < ext.height; ++y) {
      for (int x = 0; x < ext.width; ++x) {
        if (seen.at(x, y) == 0.0) {
          fail(ErrorCode::unobserved_pixel,
               "texture point (" + std::to_string(x + ext.min_x) + ", " +
                   std::to_string(y + ext.min_y) + ") is never observed");
        }
      }
    }
  }

  VignetteSolution sol;
  sol.vignette = ImageF(w, h, 1.0);
  sol.texture = ImageF(ext.width, ext.height, 0.0);
  ImageF num(ext.width, ext.height);
  ImageF den(ext.width, ext.height);

  // noiseless data decays geometrically and never satisfies a relative
  // stopping rule before hitting the floating-point floor, so "objective
  // negligible against the data" also counts as converged
  double data_scale = 0.0;
  for (const auto& im : images) {
    for (double p : im.pix) data_scale += p * p;
  }
  const double absolute_floor = 1e-20 * data_scale;

  double prev_obj = -1.0;
  for (int it = 0; it < max_iterations; ++it) {
    // B step: per texture point, B = sum(t V I) / sum((t V)^2)
    std::fill(num.pix.begin(), num.pix.end(), 0.0);
    std::fill(den.pix.begin(), den.pix.end(), 0.0);
    for (std::size_t v = 0; v < images.size(); ++v) {
      const double t = views[v].exposure_s;
      const int ox = views[v].offset_x - ext.min_x;
      const int oy = views[v].offset_y - ext.min_y;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const double tv = t * sol.vignette.at(x, y);
          num.at(x + ox, y + oy) += tv * images[v].at(x, y);
          den.at(x + ox, y + oy) += tv * tv;
        }
      }
    }
    for (std::size_t i = 0; i < sol.texture.size(); ++i) {
      if (den.pix[i] > 0.0) sol.texture.pix[i] = num.pix[i] / den.pix[i];
    }
    sol.objective_history.push_back(
        objective(images, views, sol.texture, sol.vignette, ext));

    // V step: per pixel, V = sum(t B I) / sum((t B)^2)
    ImageF vnum(w, h);
    ImageF vden(w, h);
    for (std::size_t v = 0; v < images.size(); ++v) {
      const double t = views[v].exposure_s;
      const int ox = views[v].offset_x - ext.min_x;
      const int oy = views[v].offset_y - ext.min_y;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const double tb = t * sol.texture.at(x + ox, y + oy);
          vnum.at(x, y) += tb * images[v].at(x, y);
          vden.at(x, y) += tb * tb;
        }
      }
    }
    for (std::size_t i = 0; i < sol.vignette.size(); ++i) {
      if (vden.pix[i] > 0.0) sol.vignette.pix[i] = vnum.pix[i] / vden.pix[i];
    }

    // Fix the scale gauge each sweep: V <- V / max V, B <- B * max V keeps
    // the product (and hence the objective) unchanged.
    const double vmax =
        *std::max_element(sol.vignette.pix.begin(), sol.vignette.pix.end());
    if (vmax > 0.0) {
      for (double& p : sol.vignette.pix) p /= vmax;
      for (double& p : sol.texture.pix) p *= vmax;
    }

    const double obj =
        objective(images, views, sol.texture, sol.vignette, ext);
    sol.objective_history.push_back(obj);
    sol.iterations = it + 1;

    if (obj <= absolute_floor) {
      sol.converged = true;
      break;
    }
    if (prev_obj >= 0.0) {
      const double denom = std::max(prev_obj, 1e-300);
      if (std::abs(prev_obj - obj) / denom < tol) {
        sol.converged = true;
        break;
      }
    }
    prev_obj = obj;
  }

  for (double& p : sol.vignette.pix) p = std::clamp(p, 0.0, 1.0);
  for (double& p : sol.texture.pix) p = std::max(p, 0.0);
  return sol;
}

// ---------------------------------------------------------------------------
// Exposure control fit

double ExposureModel::predict(double lux) const {
  if (lux <= 0.0) return t_max_s;
  return std::clamp(k_lux_s / lux, t_min_s, t_max_s);
}

ExposureFit fit_exposure_control(
    const std::vector<std::pair<double, double>>& lux_exposure_s,
    double t_min_s, double t_max_s) {
  if (!(t_min_s > 0.0) || !(t_max_s > t_min_s)) {
    fail(ErrorCode::invalid_argument, "need 0 < t_min < t_max");
  }
  // minimize sum (t_i - k / L_i)^2 -> k = sum(t_i / L_i) / sum(1 / L_i^2)
  double num = 0.0, den = 0.0;
  ExposureFit fit;
  for (const auto& [lux, t] : lux_exposure_s) {
    if (lux <= 0.0) {
      fail(ErrorCode::invalid_argument, "illuminance must be positive");
    }
    if (t <= t_min_s || t >= t_max_s) {
      ++fit.excluded;  // saturated against a clamp bound
      continue;
    }
    num += t / lux;
    den += 1.0 / (lux * lux);
    ++fit.used;
  }
  if (fit.used == 0) {
    fail(ErrorCode::all_saturated,
         "all " + std::to_string(fit.excluded) + " samples sit at the clamps");
  }
  fit.k_lux_s = num / den;
  return fit;
}

}  // namespace vical
