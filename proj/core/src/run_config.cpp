#include "hpfold/run_config.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace hpfold {
namespace {

using Json = nlohmann::ordered_json;

// Wraps nlohmann's exceptions so callers only ever see ParseError with
// the offending field spelled out.
const Json& field(const Json& obj, const std::string& scope,
                  const char* key) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw ParseError("config is missing field '" + scope + key + "'");
  return *it;
}

template <typename T>
T get(const Json& obj, const std::string& scope, const char* key) {
  const Json& value = field(obj, scope, key);
  try {
    return value.get<T>();
  } catch (const Json::exception&) {
    throw ParseError("config field '" + scope + key + "' has the wrong type");
  }
}

void reject_unknown(const Json& obj, const std::string& scope,
                    std::initializer_list<const char*> allowed) {
  if (!obj.is_object())
    throw ParseError("config section '" + scope + "' must be an object");
  std::unordered_set<std::string> known;
  for (const char* key : allowed) known.insert(key);
  for (const auto& item : obj.items()) {
    if (!known.count(item.key()))
      throw ParseError("unknown config field '" + scope + item.key() + "'");
  }
}

SearchConfig parse_search(const Json& obj, const std::string& scope) {
  reject_unknown(obj, scope,
                 {"simulations", "c_alpha", "dirichlet_alpha",
                  "dirichlet_epsilon"});
  SearchConfig s;
  s.simulations = get<int>(obj, scope, "simulations");
  s.c_alpha = get<double>(obj, scope, "c_alpha");
  s.dirichlet_alpha = get<double>(obj, scope, "dirichlet_alpha");
  s.dirichlet_epsilon = get<double>(obj, scope, "dirichlet_epsilon");
  return s;
}

Json search_json(const SearchConfig& s) {
  Json obj;
  obj["simulations"] = s.simulations;
  obj["c_alpha"] = s.c_alpha;
  obj["dirichlet_alpha"] = s.dirichlet_alpha;
  obj["dirichlet_epsilon"] = s.dirichlet_epsilon;
  return obj;
}

}  // namespace

bool RunConfig::operator==(const RunConfig& other) const {
  auto search_eq = [](const SearchConfig& a, const SearchConfig& b) {
    return a.simulations == b.simulations && a.c_alpha == b.c_alpha &&
           a.dirichlet_alpha == b.dirichlet_alpha &&
           a.dirichlet_epsilon == b.dirichlet_epsilon;
  };
  const TrainingConfig& a = training;
  const TrainingConfig& b = other.training;
  return run_dir == other.run_dir &&
         a.net.grid_size == b.net.grid_size &&
         a.net.residual_blocks == b.net.residual_blocks &&
         a.net.channels == b.net.channels &&
         a.net.learning_rate == b.net.learning_rate &&
         a.net.momentum == b.net.momentum &&
         a.net.weight_decay == b.net.weight_decay &&
         search_eq(a.search, b.search) &&
         search_eq(a.gate_search, b.gate_search) &&
         a.batch_size == b.batch_size &&
         a.memory_capacity == b.memory_capacity &&
         a.steps_per_episode == b.steps_per_episode &&
         a.gate_interval == b.gate_interval && a.gate_size == b.gate_size &&
         a.workers == b.workers && a.seed == b.seed &&
         a.train_seconds == b.train_seconds && a.max_steps == b.max_steps &&
         a.corpus_file == b.corpus_file &&
         a.corpus.count == b.corpus.count &&
         a.corpus.min_length == b.corpus.min_length &&
         a.corpus.max_length == b.corpus.max_length &&
         a.corpus.min_h_fraction == b.corpus.min_h_fraction &&
         a.corpus.max_h_fraction == b.corpus.max_h_fraction;
}

RunConfig parse_run_config(const std::string& json_text) {
  Json root;
  try {
    root = Json::parse(json_text);
  } catch (const Json::exception& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(root, "",
                 {"run_dir", "seed", "workers", "net", "search", "gate_search",
                  "batch_size", "memory_capacity", "steps_per_episode",
                  "gate_interval", "gate_size", "train_seconds", "max_steps",
                  "corpus_file", "corpus"});

  RunConfig config;
  config.run_dir = get<std::string>(root, "", "run_dir");
  TrainingConfig& t = config.training;
  t.seed = get<uint64_t>(root, "", "seed");
  t.workers = get<int>(root, "", "workers");
  t.batch_size = get<int>(root, "", "batch_size");
  t.memory_capacity = get<int>(root, "", "memory_capacity");
  t.steps_per_episode = get<int>(root, "", "steps_per_episode");
  t.gate_interval = get<int>(root, "", "gate_interval");
  t.gate_size = get<int>(root, "", "gate_size");
  t.train_seconds = get<double>(root, "", "train_seconds");
  t.max_steps = get<uint64_t>(root, "", "max_steps");
  t.corpus_file = get<std::string>(root, "", "corpus_file");

  const Json& net = field(root, "", "net");
  reject_unknown(net, "net.",
                 {"grid_size", "residual_blocks", "channels", "learning_rate",
                  "momentum", "weight_decay"});
  t.net.grid_size = get<int>(net, "net.", "grid_size");
  t.net.residual_blocks = get<int>(net, "net.", "residual_blocks");
  t.net.channels = get<int>(net, "net.", "channels");
  t.net.learning_rate = get<double>(net, "net.", "learning_rate");
  t.net.momentum = get<double>(net, "net.", "momentum");
  t.net.weight_decay = get<double>(net, "net.", "weight_decay");

  t.search = parse_search(field(root, "", "search"), "search.");
  t.gate_search = parse_search(field(root, "", "gate_search"), "gate_search.");

  const Json& corpus = field(root, "", "corpus");
  reject_unknown(corpus, "corpus.",
                 {"count", "min_length", "max_length", "min_h_fraction",
                  "max_h_fraction"});
  t.corpus.count = get<int>(corpus, "corpus.", "count");
  t.corpus.min_length = get<int>(corpus, "corpus.", "min_length");
  t.corpus.max_length = get<int>(corpus, "corpus.", "max_length");
  t.corpus.min_h_fraction = get<double>(corpus, "corpus.", "min_h_fraction");
  t.corpus.max_h_fraction = get<double>(corpus, "corpus.", "max_h_fraction");
  return config;
}

std::string serialize_run_config(const RunConfig& config) {
  const TrainingConfig& t = config.training;
  Json root;
  root["run_dir"] = config.run_dir;
  root["seed"] = t.seed;
  root["workers"] = t.workers;
  Json net;
  net["grid_size"] = t.net.grid_size;
  net["residual_blocks"] = t.net.residual_blocks;
  net["channels"] = t.net.channels;
  net["learning_rate"] = t.net.learning_rate;
  net["momentum"] = t.net.momentum;
  net["weight_decay"] = t.net.weight_decay;
  root["net"] = std::move(net);
  root["search"] = search_json(t.search);
  root["gate_search"] = search_json(t.gate_search);
  root["batch_size"] = t.batch_size;
  root["memory_capacity"] = t.memory_capacity;
  root["steps_per_episode"] = t.steps_per_episode;
  root["gate_interval"] = t.gate_interval;
  root["gate_size"] = t.gate_size;
  root["train_seconds"] = t.train_seconds;
  root["max_steps"] = t.max_steps;
  Json corpus;
  corpus["count"] = t.corpus.count;
  corpus["min_length"] = t.corpus.min_length;
  corpus["max_length"] = t.corpus.max_length;
  corpus["min_h_fraction"] = t.corpus.min_h_fraction;
  corpus["max_h_fraction"] = t.corpus.max_h_fraction;
  root["corpus"] = std::move(corpus);
  root["corpus_file"] = t.corpus_file;
  return root.dump(2) + "\n";
}

RunConfig read_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

void write_run_config(const std::filesystem::path& path,
                      const RunConfig& config) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw ParseError("cannot write config file: " + tmp.string());
    out << serialize_run_config(config);
    if (!out) throw ParseError("failed writing config file: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

RunConfig default_run_config() {
  RunConfig config;
  config.run_dir = "runs/default";
  return config;
}

}  // namespace hpfold
