#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "varsched/types.hpp"

namespace varsched::classifier {

enum class FunctionalUnit { single_precision, double_precision, texture, special, tensor };

inline constexpr std::array<FunctionalUnit, 5> kFunctionalUnits = {
    FunctionalUnit::single_precision, FunctionalUnit::double_precision, FunctionalUnit::texture,
    FunctionalUnit::special, FunctionalUnit::tensor};

std::string_view to_string(FunctionalUnit unit);
FunctionalUnit parse_functional_unit(std::string_view name);

// Features live on the profiler's [0, 10] utilization scale.
struct AppFeatures {
  std::string app_name;
  double dram_util = 0.0;
  double peak_fu_util = 0.0;
};

struct KernelRecord {
  std::string kernel_type;
  double runtime = 0.0;  // seconds
  std::map<FunctionalUnit, double> util_per_fu;
};

struct ClassModel {
  int k = 0;
  // (dram_util, peak_fu_util), index 0 = class A = most compute-intensive.
  std::vector<std::array<double, 2>> centroids;
  std::vector<std::string> labels;
};

// Runtime-weighted mean utilization of one functional unit across kernels.
// A kernel that does not report the unit counts as 0 for it.
double fu_util(std::span<const KernelRecord> kernels, FunctionalUnit unit);

double peak_fu_util(std::span<const KernelRecord> kernels);

// Clusters apps in (DRAM, peak FU) space and orders classes by descending
// centroid peak FU utilization.
ClassModel build_class_model(std::span<const AppFeatures> apps, int k, std::uint64_t seed);

ClassIndex classify_app(const ClassModel& model, const AppFeatures& features);

void validate(const AppFeatures& features);
void validate(const KernelRecord& kernel);

// CSV with columns app_name,dram_util,peak_fu_util.
std::vector<AppFeatures> load_app_features(const std::filesystem::path& path);

// CSV with columns app_name,kernel_type,runtime_s,unit,util. One row per
// (kernel, unit). The pseudo-unit "dram" carries DRAM utilization, which is
// aggregated with the same runtime weighting but excluded from the peak.
std::vector<AppFeatures> features_from_kernel_file(const std::filesystem::path& path);

}  // namespace varsched::classifier
