#include "sbdrift/experiments.hpp"

#include "sbdrift/csv.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#ifndef SBDRIFT_VERSION
#define SBDRIFT_VERSION "0.1.0"
#endif

namespace sbdrift::experiments {

Setup make_setup(const config::ExperimentConfig& cfg, models::Testbed testbed,
                 models::Variant variant) {
  Setup s{testbed,
          variant,
          models::to_string(testbed) + (variant == models::Variant::Wide ? "-wide" : ""),
          models::make_law(testbed, variant),
          cfg.interval,
          config::resolve_query(cfg, testbed),
          {},
          {},
          0.0};
  const int d = models::dimension_of(testbed);
  const auto grid = config::resolve_eval_grid(cfg, d);
  s.xgrid = truth::tensor_grid(d, grid.lower, grid.upper, grid.points);
  s.conditioning_grid = truth::tensor_grid(d, grid.lower, grid.upper, cfg.conditioning_points);
  s.min_f_grid = std::numeric_limits<double>::infinity();
  for (const Vec& xi : s.conditioning_grid) s.min_f_grid = std::min(s.min_f_grid, s.law.marginal_density(xi));
  return s;
}

estimator::Floors floors_for(const Setup& setup, const truth::TruthCache& truth) {
  return {0.5 * setup.min_f_grid, 0.5 * truth.min_dstar()};
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string tick_label(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace

void write_line_plot(const std::filesystem::path& svg_path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<Series>& series, bool log_x, bool log_y) {
  if (svg_path.has_parent_path()) std::filesystem::create_directories(svg_path.parent_path());
  auto tx = [&](double v) { return log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return log_y ? std::log10(v) : v; };

  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double x = tx(s.x[i]);
      const double y = ty(s.y[i]);
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  if (!std::isfinite(x_lo)) x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  if (x_hi == x_lo) x_hi = x_lo + 1.0;
  if (y_hi == y_lo) y_hi = y_lo + 1.0;
  const double pad = 0.05 * (y_hi - y_lo);
  y_lo -= pad;
  y_hi += pad;

  const double width = 640, height = 420, left = 80, right = 160, top = 40, bottom = 60;
  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double x) { return left + (tx(x) - x_lo) / (x_hi - x_lo) * pw; };
  auto py = [&](double y) { return top + (1.0 - (ty(y) - y_lo) / (y_hi - y_lo)) * ph; };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  std::ofstream out(svg_path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
      << escape_xml(title) << "</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = x_lo + (x_hi - x_lo) * k / 4.0;
    const double fy = y_lo + (y_hi - y_lo) * k / 4.0;
    const double sx = left + pw * k / 4.0;
    const double sy = top + ph * (1.0 - k / 4.0);
    out << "<text x=\"" << sx << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
        << tick_label(log_x ? std::pow(10.0, fx) : fx) << "</text>\n";
    out << "<text x=\"" << left - 6 << "\" y=\"" << sy + 4 << "\" text-anchor=\"end\">"
        << tick_label(log_y ? std::pow(10.0, fy) : fy) << "</text>\n";
  }
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 16 << "\" text-anchor=\"middle\">"
      << escape_xml(x_label) << (log_x ? " (log)" : "") << "</text>\n";
  out << "<text transform=\"translate(18," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape_xml(y_label) << (log_y ? " (log)" : "") << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = colors[k % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\""
        << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(tx(s.x[i])) || !std::isfinite(ty(s.y[i]))) continue;
      out << fixed(px(s.x[i])) << ',' << fixed(py(s.y[i])) << ' ';
    }
    out << "\"/>\n";
    const double ly = top + 16 + 18.0 * k;
    out << "<line x1=\"" << left + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 34
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\""
        << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
    out << "<text x=\"" << left + pw + 40 << "\" y=\"" << ly + 4 << "\">" << escape_xml(s.name)
        << "</text>\n";
  }
  out << "</svg>\n";

  auto sidecar = svg_path;
  sidecar.replace_extension(".csv");
  csv::Writer table(sidecar, {"series", "x", "y"});
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      table << s.name << s.x[i] << s.y[i];
      table.end_row();
    }
  }
}

void write_manifest(const std::string& experiment, const config::ExperimentConfig& cfg,
                    RunArtifacts& artifacts) {
  const OutputTree tree{cfg.output_dir};
  const std::string hash = config::config_hash(cfg);
  nlohmann::json j;
  j["experiment"] = experiment;
  j["config_hash"] = hash;
  j["seed"] = cfg.seed;
  j["version"] = SBDRIFT_VERSION;
  j["compiler"] = __VERSION__;
  j["config"] = nlohmann::json::parse(config::canonical_text(cfg));
  auto add = [&](const char* kind, const std::vector<std::filesystem::path>& files) {
    for (const auto& f : files) {
      j["files"].push_back({{"path", std::filesystem::relative(f, tree.root).generic_string()},
                            {"kind", kind},
                            {"config_hash", hash},
                            {"seed", cfg.seed}});
    }
  };
  add("raw", artifacts.raw);
  add("processed", artifacts.processed);
  add("figure", artifacts.figures);
  artifacts.manifest = tree.root / ("manifest_" + experiment + ".json");
  std::filesystem::create_directories(tree.root);
  std::ofstream out(artifacts.manifest);
  out << j.dump(2) << '\n';
}

}  // namespace sbdrift::experiments
