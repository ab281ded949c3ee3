#pragma once

#include "vhjb/autodiff/param_vector.hpp"
#include "vhjb/networks/network.hpp"

#include <filesystem>
#include <string>

namespace vhjb {

struct Checkpoint {
  NetworkSpec spec;
  ParamVector params;
};

/// JSON text {family, widths, activation, beta, layout, values}. Doubles are printed
/// in shortest round-trip form, so loading restores every value bitwise.
std::string checkpoint_to_json(const NetworkSpec& spec, const ParamVector& params);
Checkpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const NetworkSpec& spec, const ParamVector& params);
/// Throws std::runtime_error on unreadable files, std::invalid_argument on bad content.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace vhjb
