#include "ahcr/catalog.hpp"

#include "ahcr/errors.hpp"

namespace ahcr {

const std::array<std::string, kNumClasses>& class_names() {
  static const std::array<std::string, kNumClasses> names = {
      "alef", "baa",  "taa",  "thaa", "gem",  "haa",  "khaa",
      "dal",  "zal",  "raa",  "zeen", "seen", "sheen", "saad",
      "daad", "taaa", "zaaa", "aeen", "gheen", "faa",  "qaf",
      "kaf",  "lam",  "mem",  "noon", "heh",  "waw",  "yaa"};
  return names;
}

const std::string& class_name(int label) {
  if (label < 1 || label > kNumClasses)
    throw InputError("class label " + std::to_string(label) +
                     " outside 1.." + std::to_string(kNumClasses));
  return class_names()[static_cast<std::size_t>(label - 1)];
}

int class_id(const std::string& name) {
  const auto& names = class_names();
  for (int i = 0; i < kNumClasses; ++i)
    if (names[static_cast<std::size_t>(i)] == name) return i + 1;
  return 0;
}

}  // namespace ahcr
