#include <doctest.h>

#include <filesystem>
#include <string>

#include <json.hpp>

#include "hpfold/error.hpp"
#include "hpfold/run_config.hpp"

using namespace hpfold;

namespace {

std::string default_text() { return serialize_run_config(default_run_config()); }

std::string message_of(const std::string& json_text) {
  try {
    parse_run_config(json_text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("the default config round-trips through its JSON form") {
  RunConfig config = default_run_config();
  RunConfig back = parse_run_config(serialize_run_config(config));
  CHECK(back == config);
  CHECK(serialize_run_config(back) == serialize_run_config(config));
}

TEST_CASE("config files round-trip through disk") {
  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() / "hpfold_test_config.json";
  RunConfig config = default_run_config();
  config.training.seed = 1234;
  config.training.net.channels = 24;
  config.run_dir = "runs/elsewhere";
  write_run_config(path, config);
  CHECK(read_run_config(path) == config);
  fs::remove(path);
  CHECK_THROWS_AS(read_run_config(path), ParseError);
}

TEST_CASE("unknown fields are rejected by name") {
  nlohmann::ordered_json j = nlohmann::ordered_json::parse(default_text());
  j["surprise"] = 1;
  std::string msg = message_of(j.dump());
  CHECK(msg.find("unknown config field") != std::string::npos);
  CHECK(msg.find("surprise") != std::string::npos);

  nlohmann::ordered_json nested = nlohmann::ordered_json::parse(default_text());
  nested["net"]["depth"] = 3;
  msg = message_of(nested.dump());
  CHECK(msg.find("net.depth") != std::string::npos);
}

TEST_CASE("missing fields are reported by name") {
  nlohmann::ordered_json j = nlohmann::ordered_json::parse(default_text());
  j["net"].erase("channels");
  std::string msg = message_of(j.dump());
  CHECK(msg.find("missing field") != std::string::npos);
  CHECK(msg.find("net.channels") != std::string::npos);

  nlohmann::ordered_json root = nlohmann::ordered_json::parse(default_text());
  root.erase("seed");
  msg = message_of(root.dump());
  CHECK(msg.find("seed") != std::string::npos);
}

TEST_CASE("wrong types are reported by name") {
  nlohmann::ordered_json j = nlohmann::ordered_json::parse(default_text());
  j["seed"] = "not a number";
  std::string msg = message_of(j.dump());
  CHECK(msg.find("wrong type") != std::string::npos);
  CHECK(msg.find("seed") != std::string::npos);

  nlohmann::ordered_json section = nlohmann::ordered_json::parse(default_text());
  section["search"] = 3;
  msg = message_of(section.dump());
  CHECK(msg.find("search") != std::string::npos);
}

TEST_CASE("invalid JSON is a parse error, not a crash") {
  CHECK_THROWS_AS(parse_run_config("{ this is not json"), ParseError);
  CHECK_THROWS_AS(parse_run_config(""), ParseError);
  CHECK_THROWS_AS(parse_run_config("[1,2,3]"), ParseError);
}

TEST_CASE("every knob survives the round trip") {
  RunConfig config = default_run_config();
  config.training.net.grid_size = 25;
  config.training.net.residual_blocks = 2;
  config.training.net.channels = 8;
  config.training.net.learning_rate = 0.002;
  config.training.net.momentum = 0.8;
  config.training.net.weight_decay = 1e-4;
  config.training.search.simulations = 64;
  config.training.search.c_alpha = 1.5;
  config.training.search.dirichlet_alpha = 0.06;
  config.training.search.dirichlet_epsilon = 0.3;
  config.training.gate_search.simulations = 96;
  config.training.batch_size = 32;
  config.training.memory_capacity = 1000;
  config.training.steps_per_episode = 2;
  config.training.gate_interval = 50;
  config.training.gate_size = 8;
  config.training.workers = 2;
  config.training.seed = 99;
  config.training.train_seconds = 10.5;
  config.training.max_steps = 500;
  config.training.corpus_file = "corpus.txt";
  config.training.corpus.count = 100;
  config.training.corpus.min_length = 10;
  config.training.corpus.max_length = 14;
  config.training.corpus.min_h_fraction = 0.25;
  config.training.corpus.max_h_fraction = 0.75;
  config.run_dir = "runs/custom";

  RunConfig back = parse_run_config(serialize_run_config(config));
  CHECK(back == config);
}
