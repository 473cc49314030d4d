#pragma once

#include <array>
#include <string>

namespace ahcr {

inline constexpr int kNumClasses = 28;

/// Class names in dataset order (label 1 = alef ... label 28 = yaa).
const std::array<std::string, kNumClasses>& class_names();

/// Name for a 1-based label; throws InputError when out of range.
const std::string& class_name(int label);

/// 1-based label for a name, or 0 when unknown.
int class_id(const std::string& name);

}  // namespace ahcr
