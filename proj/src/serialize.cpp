// Copyright 2026 The nclosure Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nclosure/serialize.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "nclosure/error.hpp"

namespace nclosure {

using nlohmann::json;

namespace {

json net_json(const DenseNet& net) {
  json j;
  j["format"] = kNetFormat;
  j["n_in"] = net.n_in();
  json layers = json::array();
  for (std::size_t l = 0; l < net.n_layers(); ++l) {
    layers.push_back({{"out", net.layer_out(l)},
                      {"activation", to_string(net.activation(l))}});
  }
  j["layers"] = layers;
  const auto p = net.params();
  j["weights"] = std::vector<double>(p.begin(), p.end());
  std::vector<int> mask(net.prune_mask().begin(), net.prune_mask().end());
  j["prune_mask"] = mask;
  j["output_scale"] = {{"enabled", net.output_scale().enabled},
                       {"index", net.output_scale().index}};
  if (net.output_map()) {
    const RowMatrix& m = *net.output_map();
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      std::vector<double> row(m.row(r).data(), m.row(r).data() + m.cols());
      rows.push_back(row);
    }
    j["output_map"] = rows;
  } else {
    j["output_map"] = nullptr;
  }
  json cons = json::array();
  for (const ConstraintSpec& c : net.constraints()) {
    json derived = json::array();
    for (const DerivedRow& d : c.derived) {
      json comb = json::array();
      for (const auto& [row, coef] : d.combination) comb.push_back({row, coef});
      derived.push_back({{"row", d.row}, {"combination", comb}});
    }
    cons.push_back({{"layer", c.layer}, {"derived", derived}});
  }
  j["constraints"] = cons;
  return j;
}

DenseNet net_from_json(const json& j) {
  if (j.value("format", "") != kNetFormat) {
    throw ConfigError("not a " + std::string(kNetFormat) + " object");
  }
  std::vector<LayerSpec> layers;
  for (const json& l : j.at("layers")) {
    layers.push_back({l.at("out").get<int>(),
                      parse_activation(l.at("activation").get<std::string>())});
  }
  DenseNet net(j.at("n_in").get<int>(), std::move(layers));
  if (const json& m = j.at("output_map"); !m.is_null()) {
    const auto rows = m.get<std::vector<std::vector<double>>>();
    if (rows.empty()) throw ConfigError("empty output map");
    RowMatrix map(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != rows.front().size()) {
        throw ConfigError("ragged output map");
      }
      for (std::size_t c = 0; c < rows[r].size(); ++c) {
        map(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            rows[r][c];
      }
    }
    net.set_output_map(std::move(map));
  }
  const json& sc = j.at("output_scale");
  net.set_output_scale({sc.at("enabled").get<bool>(), sc.at("index").get<int>()});
  for (const json& c : j.at("constraints")) {
    ConstraintSpec spec;
    spec.layer = c.at("layer").get<int>();
    for (const json& d : c.at("derived")) {
      DerivedRow row;
      row.row = d.at("row").get<int>();
      for (const json& term : d.at("combination")) {
        row.combination.emplace_back(term.at(0).get<int>(),
                                     term.at(1).get<double>());
      }
      spec.derived.push_back(std::move(row));
    }
    net.add_constraint(std::move(spec));
  }
  const auto w = j.at("weights").get<std::vector<double>>();
  if (w.size() != net.param_count()) {
    throw ConfigError("weight count does not match layer shapes");
  }
  std::copy(w.begin(), w.end(), net.params().begin());
  const auto mask = j.at("prune_mask").get<std::vector<int>>();
  std::vector<std::uint8_t> m8(mask.begin(), mask.end());
  net.set_prune_mask(std::move(m8));
  // Stored weights already satisfy their ties; re-applying is a no-op up to
  // the exact same arithmetic and keeps hand-edited files consistent.
  net.apply_constraints();
  return net;
}

json term_json(const NetTerm& term) {
  return {{"library", term.library.names()},
          {"library_scales", term.library.scales()},
          {"net", net_json(term.net)}};
}

NetTerm term_from_json(const json& j) {
  FeatureLibrary lib =
      FeatureLibrary::parse(j.at("library").get<std::vector<std::string>>());
  if (j.contains("library_scales")) {
    lib.set_scales(j.at("library_scales").get<std::vector<double>>());
  }
  return NetTerm{std::move(lib), net_from_json(j.at("net"))};
}

json parse_or_throw(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed weight file: ") + e.what());
  }
}

}  // namespace

std::string dense_net_to_text(const DenseNet& net) {
  return net_json(net).dump(1) + "\n";
}

DenseNet dense_net_from_text(const std::string& text) {
  try {
    return net_from_json(parse_or_throw(text));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad network dump: ") + e.what());
  }
}

std::string closure_to_text(const ClosureModel& model) {
  json j;
  j["format"] = kClosureFormat;
  j["n_states"] = model.n_states;
  j["tau"] = model.tau;
  j["markovian"] = model.markovian ? term_json(*model.markovian) : json();
  j["memory"] = model.memory ? term_json(*model.memory) : json();
  return j.dump(1) + "\n";
}

void closure_from_text(const std::string& text, ClosureModel& model) {
  const json j = parse_or_throw(text);
  try {
    if (j.value("format", "") != kClosureFormat) {
      throw ConfigError("not a " + std::string(kClosureFormat) + " file");
    }
    if (j.at("n_states").get<int>() != model.n_states) {
      throw ConfigError("weight file state count does not match model");
    }
    model.tau = j.at("tau").get<double>();
    model.markovian.reset();
    model.memory.reset();
    if (!j.at("markovian").is_null()) {
      model.markovian = term_from_json(j.at("markovian"));
    }
    if (!j.at("memory").is_null()) model.memory = term_from_json(j.at("memory"));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad closure file: ") + e.what());
  }
  model.validate();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

void save_closure(const std::string& path, const ClosureModel& model) {
  write_text_file(path, closure_to_text(model));
}

void load_closure(const std::string& path, ClosureModel& model) {
  closure_from_text(read_text_file(path), model);
}

}  // namespace nclosure
