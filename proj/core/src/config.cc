/*
 * Copyright 2026 The fedsln Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fedsln/config.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "fedsln/error.hpp"
#include "fedsln/format.hpp"

namespace fedsln {

std::string ToString(Method m) {
  switch (m) {
    case Method::kCentralized:
      return "centralized";
    case Method::kFedAvg:
      return "fedavg";
    case Method::kFedAvgFt:
      return "fedavg_ft";
    case Method::kPerFedAvgHf:
      return "perfedavg_hf";
    case Method::kFedAla:
      return "fedala";
  }
  return "?";
}

Method MethodFromString(const std::string& s) {
  for (Method m : kAllMethods) {
    if (ToString(m) == s) return m;
  }
  throw ValidationError("unknown method \"" + s + "\"");
}

TrainConfig DefaultTrainConfig(Method m) {
  TrainConfig c;
  switch (m) {
    case Method::kCentralized:
      c.learning_rate = 0.001;
      c.epochs = 200;
      c.batch_size = 256;
      break;
    case Method::kFedAvg:
      c.learning_rate = 0.001;
      c.global_rounds = 30;
      c.local_steps = 200;
      c.batch_size = 256;
      break;
    case Method::kFedAvgFt:
      // Fine-tuning stage only; the FedAvg stage uses the fedavg section.
      c.learning_rate = 0.0001;
      c.batch_size = 64;
      c.local_steps = 200;
      break;
    case Method::kPerFedAvgHf:
      c.learning_rate = 0.01;
      c.batch_size = 256;
      c.local_steps = 350;
      c.global_rounds = 15;
      break;
    case Method::kFedAla:
      c.learning_rate = 0.01;
      c.global_rounds = 30;
      c.local_steps = 100;
      c.batch_size = 128;
      c.ala_top_layers = 2;
      c.ala_data_percent = 80.0;
      break;
  }
  return c;
}

const TrainConfig& ExperimentConfig::Train(Method m) const {
  auto it = train.find(m);
  if (it == train.end()) {
    throw ValidationError("no training configuration for " + ToString(m));
  }
  return it->second;
}

bool ExperimentConfig::Runs(Method m) const {
  return std::find(methods.begin(), methods.end(), m) != methods.end();
}

void ExperimentConfig::Validate() const {
  if (clients.empty()) throw ValidationError("config: at least one client");
  if (seeds.empty()) throw ValidationError("config: at least one seed");
  if (methods.empty()) throw ValidationError("config: method set is empty");
  split.Validate();
  if (!(split.train_fraction > 0.0 && split.train_fraction < 1.0)) {
    throw ValidationError("config: train_fraction must lie in (0, 1)");
  }
  if (!(negatives_per_positive >= 0.0)) {
    throw ValidationError("config: negatives_per_positive must be >= 0");
  }
  if (widths.size() < 2 || widths.front() != kNumFeatures ||
      widths.back() != 1) {
    throw ValidationError("config: widths must start at 6 and end at 1");
  }
  if (std::find(widths.begin(), widths.end(), 0) != widths.end()) {
    throw ValidationError("config: widths must be positive");
  }
  for (const auto& [m, t] : train) {
    try {
      t.Validate();
    } catch (const ValidationError& e) {
      throw ValidationError("config [" + ToString(m) + "]: " + e.what());
    }
  }
  if (Runs(Method::kFedAla) &&
      Train(Method::kFedAla).ala_top_layers > widths.size() - 1) {
    throw ValidationError("config: ala_top_layers exceeds the layer count");
  }
  std::set<std::string> names;
  for (const auto& c : clients) {
    if (!names.insert(c.name).second) {
      throw ValidationError("config: duplicate client name " + c.name);
    }
    if (c.edge_list.empty()) {
      if (!c.synthetic) {
        throw ValidationError("config: client " + c.name +
                              " needs edge_list or generator keys");
      }
      c.synthetic->Validate();
    }
  }
  if (explain.enabled) {
    for (Method m : explain.methods) {
      if (!Runs(m)) {
        throw ValidationError("config: explained method " + ToString(m) +
                              " is not run");
      }
    }
    if (explain.background == 0) {
      throw ValidationError("config: explain background must be positive");
    }
  }
}

ExperimentConfig DefaultExperimentConfig() {
  ExperimentConfig cfg;
  for (Method m : kAllMethods) {
    cfg.train[m] = DefaultTrainConfig(m);
    cfg.methods.push_back(m);
  }
  return cfg;
}

namespace {

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string JoinList(const std::vector<std::string>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) out += ", ";
    out += xs[i];
  }
  return out;
}

std::uint64_t ParseU64(const std::string& s) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    if (!s.empty() && s[0] == '-') throw std::invalid_argument(s);
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    throw ValidationError("not a non-negative integer: \"" + s + "\"");
  }
  if (pos != s.size()) {
    throw ValidationError("not a non-negative integer: \"" + s + "\"");
  }
  return v;
}

bool ParseBool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ValidationError("not a boolean: \"" + s + "\"");
}

std::string Bool(bool b) { return b ? "true" : "false"; }

void ApplyTrainKey(TrainConfig& t, const std::string& key,
                   const std::string& value) {
  if (key == "learning_rate") {
    t.learning_rate = ParseDouble(value);
  } else if (key == "batch_size") {
    t.batch_size = ParseU64(value);
  } else if (key == "local_steps") {
    t.local_steps = ParseU64(value);
  } else if (key == "global_rounds") {
    t.global_rounds = ParseU64(value);
  } else if (key == "epochs") {
    t.epochs = ParseU64(value);
  } else if (key == "positive_weight") {
    t.positive_weight = ParseDouble(value);
  } else if (key == "meta_inner") {
    t.meta_inner = ParseDouble(value);
  } else if (key == "meta_outer") {
    t.meta_outer = ParseDouble(value);
  } else if (key == "hf_delta") {
    t.hf_delta = ParseDouble(value);
  } else if (key == "ala_top_layers") {
    t.ala_top_layers = ParseU64(value);
  } else if (key == "ala_data_percent") {
    t.ala_data_percent = ParseDouble(value);
  } else if (key == "ala_weight_lr") {
    t.ala_weight_lr = ParseDouble(value);
  } else if (key == "ala_convergence_tol") {
    t.ala_convergence_tol = ParseDouble(value);
  } else if (key == "ala_window") {
    t.ala_window = ParseU64(value);
  } else if (key == "ala_max_updates") {
    t.ala_max_updates = ParseU64(value);
  } else if (key == "ala_freeze_weights") {
    t.ala_freeze_weights = ParseBool(value);
  } else {
    throw ValidationError("unknown training key \"" + key + "\"");
  }
}

ClientSource& ClientAt(std::map<std::size_t, ClientSource>& clients,
                       std::size_t index) {
  auto [it, inserted] = clients.try_emplace(index);
  if (inserted) it->second.name = "client" + std::to_string(index);
  return it->second;
}

SyntheticSpec& Synthetic(ClientSource& c) {
  if (!c.synthetic) c.synthetic.emplace();
  return *c.synthetic;
}

void ApplyEntry(ExperimentConfig& cfg,
                std::map<std::size_t, ClientSource>& clients,
                const std::string& full_key, const std::string& value) {
  const auto dot = full_key.rfind('.');
  if (dot == std::string::npos) {
    throw ValidationError("key \"" + full_key + "\" lacks a section");
  }
  const std::string section = full_key.substr(0, dot);
  const std::string key = full_key.substr(dot + 1);

  if (section == "experiment") {
    if (key == "seeds") {
      cfg.seeds.clear();
      for (const auto& s : SplitList(value)) cfg.seeds.push_back(ParseU64(s));
    } else if (key == "methods") {
      cfg.methods.clear();
      for (const auto& s : SplitList(value)) {
        const Method m = MethodFromString(s);
        if (!cfg.Runs(m)) cfg.methods.push_back(m);
      }
      std::sort(cfg.methods.begin(), cfg.methods.end());
    } else if (key == "output_dir") {
      cfg.output_dir = value;
    } else if (key == "widths") {
      cfg.widths.clear();
      for (const auto& s : SplitList(value)) cfg.widths.push_back(ParseU64(s));
    } else if (key == "activation") {
      cfg.activation = ActivationFromString(value);
    } else if (key == "negatives_per_positive") {
      cfg.negatives_per_positive = ParseDouble(value);
    } else if (key == "concurrent") {
      cfg.concurrent = ParseBool(value);
    } else {
      throw ValidationError("unknown key experiment." + key);
    }
  } else if (section == "split") {
    if (key == "removal_fraction") {
      cfg.split.removal_fraction = ParseDouble(value);
    } else if (key == "train_fraction") {
      cfg.split.train_fraction = ParseDouble(value);
    } else {
      throw ValidationError("unknown key split." + key);
    }
  } else if (section == "explain") {
    if (key == "enabled") {
      cfg.explain.enabled = ParseBool(value);
    } else if (key == "methods") {
      cfg.explain.methods.clear();
      for (const auto& s : SplitList(value)) {
        cfg.explain.methods.push_back(MethodFromString(s));
      }
    } else if (key == "pairs") {
      cfg.explain.pairs = ParseU64(value);
    } else if (key == "background") {
      cfg.explain.background = ParseU64(value);
    } else {
      throw ValidationError("unknown key explain." + key);
    }
  } else if (section.rfind("client.", 0) == 0) {
    ClientSource& c = ClientAt(clients, ParseU64(section.substr(7)));
    if (key == "name") {
      c.name = value;
    } else if (key == "edge_list") {
      c.edge_list = value;
    } else if (key == "n_nodes") {
      Synthetic(c).n_nodes = ParseU64(value);
    } else if (key == "communities") {
      Synthetic(c).n_communities = ParseU64(value);
    } else if (key == "intra_p") {
      Synthetic(c).intra_p = ParseDouble(value);
    } else if (key == "inter_p") {
      Synthetic(c).inter_p = ParseDouble(value);
    } else if (key == "graph_seed") {
      Synthetic(c).seed = ParseU64(value);
    } else {
      throw ValidationError("unknown key " + full_key);
    }
  } else {
    const Method m = MethodFromString(section);
    ApplyTrainKey(cfg.train[m], key, value);
  }
}

void ApplyAll(ExperimentConfig& cfg, const KeyValues& entries) {
  std::map<std::size_t, ClientSource> clients;
  for (std::size_t i = 0; i < cfg.clients.size(); ++i) {
    clients[i] = cfg.clients[i];
  }
  for (const auto& [key, value] : entries) {
    try {
      ApplyEntry(cfg, clients, key, value);
    } catch (const ValidationError& e) {
      throw ValidationError("config " + key + ": " + e.what());
    }
  }
  cfg.clients.clear();
  for (auto& [index, c] : clients) cfg.clients.push_back(std::move(c));
}

}  // namespace

KeyValues ParseConfigText(std::istream& in) {
  KeyValues out;
  std::set<std::string> seen;
  std::string section;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = Trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("unterminated section", line_no);
      section = Trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ParseError("empty section name", line_no);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected key = value", line_no);
    if (section.empty()) throw ParseError("entry before any section", line_no);
    const std::string key = Trim(line.substr(0, eq));
    std::string value = line.substr(eq + 1);
    const auto hash = value.find('#');
    if (hash != std::string::npos) value = value.substr(0, hash);
    value = Trim(value);
    if (key.empty()) throw ParseError("empty key", line_no);
    const std::string full = section + "." + key;
    if (!seen.insert(full).second) {
      throw ParseError("duplicate key " + full, line_no);
    }
    out.emplace_back(full, value);
  }
  return out;
}

KeyValues ParseManifestJson(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("manifest is not valid JSON: ") +
                          e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != "fedsln-manifest-1" ||
      !doc.contains("config") || !doc["config"].is_object()) {
    throw ValidationError("not a fedsln run manifest");
  }
  KeyValues out;
  for (const auto& [section, keys] : doc["config"].items()) {
    if (!keys.is_object()) {
      throw ValidationError("manifest section " + section +
                            " is not an object");
    }
    for (const auto& [key, value] : keys.items()) {
      if (!value.is_string()) {
        throw ValidationError("manifest value " + section + "." + key +
                              " is not a string");
      }
      out.emplace_back(section + "." + key, value.get<std::string>());
    }
  }
  return out;
}

ExperimentConfig ConfigFromKeyValues(const KeyValues& entries) {
  ExperimentConfig cfg = DefaultExperimentConfig();
  ApplyAll(cfg, entries);
  cfg.Validate();
  return cfg;
}

void ApplyOverride(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ValidationError("override \"" + assignment +
                          "\" is not section.key=value");
  }
  ApplyAll(cfg,
           {{Trim(assignment.substr(0, eq)), Trim(assignment.substr(eq + 1))}});
}

KeyValues ConfigToKeyValues(const ExperimentConfig& cfg) {
  KeyValues kv;
  auto put = [&](const std::string& k, const std::string& v) {
    kv.emplace_back(k, v);
  };
  std::vector<std::string> items;
  for (auto s : cfg.seeds) items.push_back(std::to_string(s));
  put("experiment.seeds", JoinList(items));
  items.clear();
  for (Method m : cfg.methods) items.push_back(ToString(m));
  put("experiment.methods", JoinList(items));
  put("experiment.output_dir", cfg.output_dir);
  items.clear();
  for (auto w : cfg.widths) items.push_back(std::to_string(w));
  put("experiment.widths", JoinList(items));
  put("experiment.activation", ToString(cfg.activation));
  put("experiment.negatives_per_positive",
      FormatDouble(cfg.negatives_per_positive));
  put("experiment.concurrent", Bool(cfg.concurrent));

  put("split.removal_fraction", FormatDouble(cfg.split.removal_fraction));
  put("split.train_fraction", FormatDouble(cfg.split.train_fraction));

  put("explain.enabled", Bool(cfg.explain.enabled));
  items.clear();
  for (Method m : cfg.explain.methods) items.push_back(ToString(m));
  put("explain.methods", JoinList(items));
  put("explain.pairs", std::to_string(cfg.explain.pairs));
  put("explain.background", std::to_string(cfg.explain.background));

  for (std::size_t i = 0; i < cfg.clients.size(); ++i) {
    const auto& c = cfg.clients[i];
    const std::string s = "client." + std::to_string(i) + ".";
    put(s + "name", c.name);
    if (!c.edge_list.empty()) {
      put(s + "edge_list", c.edge_list);
    } else if (c.synthetic) {
      put(s + "n_nodes", std::to_string(c.synthetic->n_nodes));
      put(s + "communities", std::to_string(c.synthetic->n_communities));
      put(s + "intra_p", FormatDouble(c.synthetic->intra_p));
      put(s + "inter_p", FormatDouble(c.synthetic->inter_p));
      put(s + "graph_seed", std::to_string(c.synthetic->seed));
    }
  }

  for (const auto& [m, t] : cfg.train) {
    const std::string s = ToString(m) + ".";
    put(s + "learning_rate", FormatDouble(t.learning_rate));
    put(s + "batch_size", std::to_string(t.batch_size));
    put(s + "local_steps", std::to_string(t.local_steps));
    put(s + "global_rounds", std::to_string(t.global_rounds));
    put(s + "epochs", std::to_string(t.epochs));
    put(s + "positive_weight", FormatDouble(t.positive_weight));
    put(s + "meta_inner", FormatDouble(t.alpha()));
    put(s + "meta_outer", FormatDouble(t.beta()));
    put(s + "hf_delta", FormatDouble(t.hf_delta));
    put(s + "ala_top_layers", std::to_string(t.ala_top_layers));
    put(s + "ala_data_percent", FormatDouble(t.ala_data_percent));
    put(s + "ala_weight_lr", FormatDouble(t.ala_weight_lr));
    put(s + "ala_convergence_tol", FormatDouble(t.ala_convergence_tol));
    put(s + "ala_window", std::to_string(t.ala_window));
    put(s + "ala_max_updates", std::to_string(t.ala_max_updates));
    put(s + "ala_freeze_weights", Bool(t.ala_freeze_weights));
  }
  return kv;
}

std::string ConfigToText(const ExperimentConfig& cfg) {
  std::ostringstream out;
  std::string current;
  for (const auto& [full, value] : ConfigToKeyValues(cfg)) {
    const auto dot = full.rfind('.');
    const std::string section = full.substr(0, dot);
    if (section != current) {
      if (!current.empty()) out << '\n';
      out << '[' << section << "]\n";
      current = section;
    }
    out << full.substr(dot + 1) << " = " << value << '\n';
  }
  return out.str();
}

std::string ConfigToManifestJson(const ExperimentConfig& cfg) {
  nlohmann::json doc;
  doc["format"] = "fedsln-manifest-1";
  nlohmann::json sections = nlohmann::json::object();
  for (const auto& [full, value] : ConfigToKeyValues(cfg)) {
    const auto dot = full.rfind('.');
    sections[full.substr(0, dot)][full.substr(dot + 1)] = value;
  }
  doc["config"] = std::move(sections);
  return doc.dump(2) + "\n";
}

ExperimentConfig LoadConfigFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    return ConfigFromKeyValues(ParseManifestJson(text));
  }
  std::istringstream ss(text);
  return ConfigFromKeyValues(ParseConfigText(ss));
}

}  // namespace fedsln
