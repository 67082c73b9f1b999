#include "varsched/classifier.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "varsched/csv.hpp"
#include "varsched/numeric.hpp"

namespace varsched::classifier {

std::string_view to_string(FunctionalUnit unit) {
  switch (unit) {
    case FunctionalUnit::single_precision: return "single_precision";
    case FunctionalUnit::double_precision: return "double_precision";
    case FunctionalUnit::texture: return "texture";
    case FunctionalUnit::special: return "special";
    case FunctionalUnit::tensor: return "tensor";
  }
  return "unknown";
}

FunctionalUnit parse_functional_unit(std::string_view name) {
  for (auto unit : kFunctionalUnits) {
    if (to_string(unit) == name) return unit;
  }
  if (name == "sp") return FunctionalUnit::single_precision;
  if (name == "dp") return FunctionalUnit::double_precision;
  if (name == "tex") return FunctionalUnit::texture;
  if (name == "sfu") return FunctionalUnit::special;
  throw std::invalid_argument(fmt::format("unknown functional unit '{}'", name));
}

namespace {

bool in_scale(double v) { return v >= 0.0 && v <= 10.0; }

}  // namespace

void validate(const AppFeatures& f) {
  if (!in_scale(f.dram_util) || !in_scale(f.peak_fu_util)) {
    throw std::invalid_argument(
        fmt::format("app '{}': utilizations must lie in [0, 10]", f.app_name));
  }
}

void validate(const KernelRecord& k) {
  if (!(k.runtime > 0.0)) {
    throw std::invalid_argument(fmt::format("kernel '{}': runtime must be positive", k.kernel_type));
  }
  for (const auto& [unit, util] : k.util_per_fu) {
    if (!in_scale(util)) {
      throw std::invalid_argument(fmt::format("kernel '{}': {} utilization {} outside [0, 10]",
                                              k.kernel_type, to_string(unit), util));
    }
  }
}

double fu_util(std::span<const KernelRecord> kernels, FunctionalUnit unit) {
  if (kernels.empty()) throw std::invalid_argument("fu_util: empty kernel list");
  double weighted = 0.0;
  double total_runtime = 0.0;
  for (const auto& k : kernels) {
    validate(k);
    const auto it = k.util_per_fu.find(unit);
    const double util = it == k.util_per_fu.end() ? 0.0 : it->second;
    weighted += k.runtime * util;
    total_runtime += k.runtime;
  }
  return weighted / total_runtime;
}

double peak_fu_util(std::span<const KernelRecord> kernels) {
  if (kernels.empty()) throw std::invalid_argument("peak_fu_util: empty kernel list");
  double peak = 0.0;
  for (auto unit : kFunctionalUnits) peak = std::max(peak, fu_util(kernels, unit));
  return peak;
}

ClassModel build_class_model(std::span<const AppFeatures> apps, int k, std::uint64_t seed) {
  std::vector<std::array<double, 2>> pts;
  pts.reserve(apps.size());
  for (const auto& a : apps) {
    validate(a);
    pts.push_back({a.dram_util, a.peak_fu_util});
  }
  const auto result = numeric::kmeans(numeric::PointSet::from_2d(pts), k, seed);

  std::vector<std::size_t> order(result.centroids.size());
  std::iota(order.begin(), order.end(), 0);
  // Most compute-intensive first; the DRAM axis only breaks exact ties.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ca = result.centroids[a];
    const auto cb = result.centroids[b];
    if (ca[1] != cb[1]) return ca[1] > cb[1];
    return ca[0] < cb[0];
  });

  ClassModel model;
  model.k = k;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto c = result.centroids[order[i]];
    model.centroids.push_back({c[0], c[1]});
    model.labels.push_back(class_label(static_cast<ClassIndex>(i)));
  }
  return model;
}

ClassIndex classify_app(const ClassModel& model, const AppFeatures& features) {
  if (model.centroids.empty()) throw std::invalid_argument("classify_app: empty class model");
  const std::array<double, 2> p{features.dram_util, features.peak_fu_util};
  ClassIndex best = 0;
  double best_d = numeric::squared_distance(p, model.centroids[0]);
  for (std::size_t c = 1; c < model.centroids.size(); ++c) {
    const double d = numeric::squared_distance(p, model.centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<ClassIndex>(c);
    }
  }
  return best;
}

std::vector<AppFeatures> load_app_features(const std::filesystem::path& path) {
  const auto src = path.string();
  const auto table = csv::read_file(path);
  const auto c_name = table.column("app_name", src);
  const auto c_dram = table.column("dram_util", src);
  const auto c_fu = table.column("peak_fu_util", src);
  std::vector<AppFeatures> apps;
  for (const auto& row : table.rows) {
    AppFeatures f{row.fields[c_name],
                  csv::to_double(row.fields[c_dram], src, row.line, "dram_util"),
                  csv::to_double(row.fields[c_fu], src, row.line, "peak_fu_util")};
    try {
      validate(f);
    } catch (const std::invalid_argument& e) {
      throw LoadError(fmt::format("{}:{}: {}", src, row.line, e.what()));
    }
    apps.push_back(std::move(f));
  }
  return apps;
}

std::vector<AppFeatures> features_from_kernel_file(const std::filesystem::path& path) {
  const auto src = path.string();
  const auto table = csv::read_file(path);
  const auto c_app = table.column("app_name", src);
  const auto c_kernel = table.column("kernel_type", src);
  const auto c_runtime = table.column("runtime_s", src);
  const auto c_unit = table.column("unit", src);
  const auto c_util = table.column("util", src);

  struct AppKernels {
    std::vector<KernelRecord> kernels;
    double dram_weighted = 0.0;
    double dram_runtime = 0.0;
  };
  std::vector<std::string> app_order;
  std::map<std::string, AppKernels> per_app;

  for (const auto& row : table.rows) {
    const auto& app = row.fields[c_app];
    const auto& kernel = row.fields[c_kernel];
    const double runtime = csv::to_double(row.fields[c_runtime], src, row.line, "runtime_s");
    const double util = csv::to_double(row.fields[c_util], src, row.line, "util");
    if (!(runtime > 0.0) || !in_scale(util)) {
      throw LoadError(fmt::format("{}:{}: runtime must be positive and util in [0, 10]", src, row.line));
    }
    if (!per_app.contains(app)) app_order.push_back(app);
    auto& entry = per_app[app];
    const auto& unit_name = row.fields[c_unit];
    if (unit_name == "dram") {
      entry.dram_weighted += runtime * util;
      entry.dram_runtime += runtime;
      continue;
    }
    FunctionalUnit unit{};
    try {
      unit = parse_functional_unit(unit_name);
    } catch (const std::invalid_argument& e) {
      throw LoadError(fmt::format("{}:{}: {}", src, row.line, e.what()));
    }
    // Rows for the same kernel share one record: same runtime, one util per unit.
    auto it = std::find_if(entry.kernels.begin(), entry.kernels.end(),
                           [&](const KernelRecord& k) { return k.kernel_type == kernel; });
    if (it == entry.kernels.end()) {
      entry.kernels.push_back(KernelRecord{kernel, runtime, {}});
      it = std::prev(entry.kernels.end());
    }
    it->util_per_fu[unit] = util;
  }

  std::vector<AppFeatures> out;
  for (const auto& app : app_order) {
    const auto& entry = per_app.at(app);
    if (entry.kernels.empty()) {
      throw LoadError(fmt::format("{}: app '{}' has no functional-unit rows", src, app));
    }
    const double dram = entry.dram_runtime > 0.0 ? entry.dram_weighted / entry.dram_runtime : 0.0;
    out.push_back(AppFeatures{app, dram, peak_fu_util(entry.kernels)});
  }
  return out;
}

}  // namespace varsched::classifier
