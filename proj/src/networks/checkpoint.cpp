#include "vhjb/networks/checkpoint.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vhjb {

using nlohmann::json;

std::string checkpoint_to_json(const NetworkSpec& spec, const ParamVector& params) {
  json doc;
  doc["family"] = to_string(spec.family);
  doc["widths"] = spec.widths;
  doc["activation"] = to_string(spec.activation);
  doc["beta"] = spec.beta;
  json layout = json::array();
  for (const auto& b : params.layout()) {
    layout.push_back({{"name", b.name}, {"offset", b.offset}, {"shape", {b.rows, b.cols}}});
  }
  doc["layout"] = std::move(layout);
  doc["values"] = std::vector<double>(params.values().data(), params.values().data() + params.size());
  return doc.dump(1);
}

Checkpoint checkpoint_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    NetworkSpec spec;
    spec.family = family_from_string(doc.at("family").get<std::string>());
    spec.widths = doc.at("widths").get<std::vector<int>>();
    spec.activation = activation_from_string(doc.at("activation").get<std::string>());
    spec.beta = doc.value("beta", kSoftplusBeta);
    const ValueNetwork net(spec);
    const auto values = doc.at("values").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(values.size()) != net.param_count()) {
      throw std::invalid_argument("checkpoint has " + std::to_string(values.size()) + " values, architecture needs " +
                                  std::to_string(net.param_count()));
    }
    // The stored layout must agree with the one the architecture implies.
    const auto& layout = doc.at("layout");
    if (layout.size() != net.layout().size()) throw std::invalid_argument("checkpoint layout has the wrong block count");
    for (std::size_t i = 0; i < layout.size(); ++i) {
      const ParamBlock& b = net.layout()[i];
      const auto shape = layout[i].at("shape").get<std::vector<int>>();
      if (layout[i].at("name").get<std::string>() != b.name || layout[i].at("offset").get<Eigen::Index>() != b.offset ||
          shape.size() != 2 || shape[0] != b.rows || shape[1] != b.cols) {
        throw std::invalid_argument("checkpoint block '" + b.name + "' does not match the architecture");
      }
    }
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
    return {spec, ParamVector(net.layout(), std::move(v))};
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const NetworkSpec& spec, const ParamVector& params) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << checkpoint_to_json(spec, params) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json(ss.str());
}

}  // namespace vhjb
