#include <fstream>
#include <sstream>

#include <json.hpp>

#include "core/errors.hpp"
#include "core/harness.hpp"

namespace ordmtl {

namespace {

using nlohmann::json;

json take(json& obj, const std::string& key) {
  json v = std::move(obj.at(key));
  obj.erase(key);
  return v;
}

void reject_leftovers(const json& obj, const std::string& where) {
  if (!obj.empty()) {
    throw ConfigError("unknown key '" + obj.begin().key() + "' in " + where);
  }
}

std::int64_t as_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ConfigError("'" + key + "' must be an integer");
  return v.get<std::int64_t>();
}

std::uint64_t as_uint(const json& v, const std::string& key) {
  if (!(v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0))) {
    throw ConfigError("'" + key + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

double as_real(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
  return v.get<double>();
}

std::string as_str(const json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError("'" + key + "' must be a string");
  return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw ConfigError("'" + key + "' must be a boolean");
  return v.get<bool>();
}

void parse_generator(json obj, GeneratorConfig* g) {
  if (!obj.is_object()) throw ConfigError("'generator' must be an object");
  if (obj.contains("n_samples")) g->n_samples = as_int(take(obj, "n_samples"), "n_samples");
  if (obj.contains("proportions")) {
    json v = take(obj, "proportions");
    if (!v.is_array() || v.empty()) throw ConfigError("'proportions' must be a non-empty array");
    g->proportions.clear();
    for (const json& p : v) g->proportions.push_back(as_real(p, "proportions"));
  }
  if (obj.contains("images_per_patient_min")) {
    g->images_per_patient_min =
        static_cast<int>(as_int(take(obj, "images_per_patient_min"), "images_per_patient_min"));
  }
  if (obj.contains("images_per_patient_max")) {
    g->images_per_patient_max =
        static_cast<int>(as_int(take(obj, "images_per_patient_max"), "images_per_patient_max"));
  }
  if (obj.contains("feature_mode")) {
    std::string mode = as_str(take(obj, "feature_mode"), "feature_mode");
    if (mode == "vector") {
      g->feature_mode = FeatureMode::Vector;
    } else if (mode == "image") {
      g->feature_mode = FeatureMode::Image;
    } else {
      throw ConfigError("'feature_mode' must be \"vector\" or \"image\", got \"" + mode + "\"");
    }
  }
  if (obj.contains("feature_dim")) {
    g->feature_dim = static_cast<int>(as_int(take(obj, "feature_dim"), "feature_dim"));
  }
  if (obj.contains("image_side")) {
    g->image_side = static_cast<int>(as_int(take(obj, "image_side"), "image_side"));
  }
  if (obj.contains("patient_latent_sd")) {
    g->patient_latent_sd = as_real(take(obj, "patient_latent_sd"), "patient_latent_sd");
  }
  if (obj.contains("image_latent_sd")) {
    g->image_latent_sd = as_real(take(obj, "image_latent_sd"), "image_latent_sd");
  }
  if (obj.contains("feature_noise_sd")) {
    g->feature_noise_sd = as_real(take(obj, "feature_noise_sd"), "feature_noise_sd");
  }
  if (obj.contains("adjacent_noise_prob")) {
    g->adjacent_noise_prob = as_real(take(obj, "adjacent_noise_prob"), "adjacent_noise_prob");
  }
  if (obj.contains("seed")) g->seed = as_uint(take(obj, "seed"), "seed");
  reject_leftovers(obj, "generator");
}

void parse_network(json obj, NetworkConfig* n) {
  if (!obj.is_object()) throw ConfigError("'network' must be an object");
  if (obj.contains("input")) n->input = InputShape::parse(as_str(take(obj, "input"), "input"));
  if (obj.contains("layers")) {
    json v = take(obj, "layers");
    if (!v.is_array()) throw ConfigError("'layers' must be an array of layer specs");
    n->layers.clear();
    for (const json& layer : v) n->layers.push_back(LayerSpec::parse(as_str(layer, "layers")));
  }
  if (obj.contains("head")) {
    n->head.num_outputs = static_cast<int>(as_int(take(obj, "head"), "head"));
  }
  if (obj.contains("width_scale")) n->width_scale = as_real(take(obj, "width_scale"), "width_scale");
  reject_leftovers(obj, "network");
}

void parse_training(json obj, TrainConfig* t) {
  if (!obj.is_object()) throw ConfigError("'training' must be an object");
  if (obj.contains("epochs")) t->epochs = static_cast<int>(as_int(take(obj, "epochs"), "epochs"));
  if (obj.contains("batch_size")) {
    t->batch_size = static_cast<int>(as_int(take(obj, "batch_size"), "batch_size"));
  }
  if (obj.contains("optimizer")) {
    std::string name = as_str(take(obj, "optimizer"), "optimizer");
    if (name == "adam") {
      t->optimizer = TrainConfig::Optimizer::Adam;
    } else if (name == "sgd") {
      t->optimizer = TrainConfig::Optimizer::SGD;
    } else {
      throw ConfigError("'optimizer' must be \"adam\" or \"sgd\", got \"" + name + "\"");
    }
  }
  if (obj.contains("learning_rate")) {
    t->learning_rate = as_real(take(obj, "learning_rate"), "learning_rate");
  }
  if (obj.contains("momentum")) t->momentum = as_real(take(obj, "momentum"), "momentum");
  if (obj.contains("seed")) t->seed = as_uint(take(obj, "seed"), "seed");
  if (obj.contains("shuffle")) t->shuffle = as_bool(take(obj, "shuffle"), "shuffle");
  reject_leftovers(obj, "training");
}

}  // namespace

GeneratorConfig generator_config_from_json_text(const std::string& text) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw ConfigError("config must be a JSON object");
  GeneratorConfig g;
  parse_generator(std::move(obj), &g);
  return g;
}

GeneratorConfig generator_config_from_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream slurp;
  slurp << in.rdbuf();
  if (in.bad()) throw ConfigError("cannot read config file '" + path + "'");
  return generator_config_from_json_text(slurp.str());
}

std::string generator_config_to_json_text(const GeneratorConfig& generator) {
  json g;
  g["n_samples"] = generator.n_samples;
  g["proportions"] = generator.proportions;
  g["images_per_patient_min"] = generator.images_per_patient_min;
  g["images_per_patient_max"] = generator.images_per_patient_max;
  g["feature_mode"] = generator.feature_mode == FeatureMode::Vector ? "vector" : "image";
  g["feature_dim"] = generator.feature_dim;
  g["image_side"] = generator.image_side;
  g["patient_latent_sd"] = generator.patient_latent_sd;
  g["image_latent_sd"] = generator.image_latent_sd;
  g["feature_noise_sd"] = generator.feature_noise_sd;
  g["adjacent_noise_prob"] = generator.adjacent_noise_prob;
  g["seed"] = generator.seed;
  return g.dump(2) + "\n";
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!obj.is_object()) throw ConfigError("config must be a JSON object");

  ExperimentConfig cfg = ExperimentConfig::defaults();
  bool explicit_network = false, explicit_tasks = false;
  if (obj.contains("generator")) parse_generator(take(obj, "generator"), &cfg.generator);
  if (obj.contains("network")) {
    explicit_network = true;
    parse_network(take(obj, "network"), &cfg.network);
  }
  if (obj.contains("training")) parse_training(take(obj, "training"), &cfg.training);
  if (obj.contains("k_folds")) {
    cfg.k_folds = static_cast<int>(as_int(take(obj, "k_folds"), "k_folds"));
  }
  if (obj.contains("seeds")) {
    json v = take(obj, "seeds");
    if (!v.is_array() || v.empty()) throw ConfigError("'seeds' must be a non-empty array");
    cfg.seeds.clear();
    for (const json& s : v) cfg.seeds.push_back(as_uint(s, "seeds"));
  }
  if (obj.contains("tasks")) {
    explicit_tasks = true;
    json v = take(obj, "tasks");
    if (!v.is_array() || v.empty()) throw ConfigError("'tasks' must be a non-empty array");
    cfg.tasks.thresholds.clear();
    for (const json& t : v) cfg.tasks.thresholds.push_back(static_cast<int>(as_int(t, "tasks")));
  }
  if (obj.contains("min_tpr")) cfg.min_tpr = as_real(take(obj, "min_tpr"), "min_tpr");
  if (obj.contains("output_dir")) cfg.output_dir = as_str(take(obj, "output_dir"), "output_dir");
  reject_leftovers(obj, "the config");

  // Defaults for the parts not spelled out follow the generator: the network
  // input must match the feature mode, the task set spans the rank scale.
  if (!explicit_network) {
    cfg.network = cfg.generator.feature_mode == FeatureMode::Vector
                      ? default_vector_config(cfg.generator.feature_dim)
                      : reference_image_config(cfg.generator.image_side);
  }
  if (!explicit_tasks) {
    cfg.tasks = ThresholdSet::full(OrdinalScale::make(cfg.generator.num_ranks()));
  } else {
    cfg.tasks.num_ranks = cfg.generator.num_ranks();
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream slurp;
  slurp << in.rdbuf();
  if (in.bad()) throw ConfigError("cannot read config file '" + path + "'");
  return from_json_text(slurp.str());
}

std::string ExperimentConfig::to_json_text() const {
  json obj;
  json g;
  g["n_samples"] = generator.n_samples;
  g["proportions"] = generator.proportions;
  g["images_per_patient_min"] = generator.images_per_patient_min;
  g["images_per_patient_max"] = generator.images_per_patient_max;
  g["feature_mode"] = generator.feature_mode == FeatureMode::Vector ? "vector" : "image";
  g["feature_dim"] = generator.feature_dim;
  g["image_side"] = generator.image_side;
  g["patient_latent_sd"] = generator.patient_latent_sd;
  g["image_latent_sd"] = generator.image_latent_sd;
  g["feature_noise_sd"] = generator.feature_noise_sd;
  g["adjacent_noise_prob"] = generator.adjacent_noise_prob;
  g["seed"] = generator.seed;
  obj["generator"] = std::move(g);

  json n;
  n["input"] = network.input.to_string();
  n["layers"] = json::array();
  for (const LayerSpec& layer : network.layers) n["layers"].push_back(layer.to_string());
  n["head"] = network.head.num_outputs;
  n["width_scale"] = network.width_scale;
  obj["network"] = std::move(n);

  json t;
  t["epochs"] = training.epochs;
  t["batch_size"] = training.batch_size;
  t["optimizer"] = training.optimizer == TrainConfig::Optimizer::Adam ? "adam" : "sgd";
  t["learning_rate"] = training.learning_rate;
  t["momentum"] = training.momentum;
  t["seed"] = training.seed;
  t["shuffle"] = training.shuffle;
  obj["training"] = std::move(t);

  obj["k_folds"] = k_folds;
  obj["seeds"] = seeds;
  obj["tasks"] = tasks.thresholds;
  obj["min_tpr"] = min_tpr;
  obj["output_dir"] = output_dir;
  return obj.dump(2) + "\n";
}

}  // namespace ordmtl
