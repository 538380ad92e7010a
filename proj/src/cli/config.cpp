#include "fqt/cli/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fqt/data/cifar10.hpp"
#include "fqt/errors.hpp"
#include "fqt/nn/presets.hpp"

namespace fqt::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class Reader {
 public:
  Reader(std::string source, std::map<std::string, std::pair<std::string, int>> entries)
      : source_(std::move(source)), entries_(std::move(entries)) {}

  template <typename T>
  void integer(const std::string& key, T& out) {
    const auto* e = find(key);
    if (!e) return;
    T value{};
    const auto& text = e->first;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) fail(key, *e, "an integer");
    out = value;
  }

  void real(const std::string& key, double& out) {
    const auto* e = find(key);
    if (!e) return;
    out = parse_real(key, *e, e->first);
  }

  void string(const std::string& key, std::string& out) {
    const auto* e = find(key);
    if (e) out = e->first;
  }

  void size_list(const std::string& key, std::vector<std::size_t>& out) {
    const auto* e = find(key);
    if (!e) return;
    std::vector<std::size_t> values;
    if (!e->first.empty()) {
      for (const auto& item : split_list(e->first)) {
        std::size_t v = 0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc{} || ptr != item.data() + item.size() || item.empty()) {
          fail(key, *e, "a comma-separated list of integers");
        }
        values.push_back(v);
      }
    }
    out = std::move(values);
  }

  void triple(const std::string& key, std::optional<std::array<double, 3>>& out) {
    const auto* e = find(key);
    if (!e) return;
    const auto items = split_list(e->first);
    if (items.size() != 3) fail(key, *e, "three comma-separated numbers");
    std::array<double, 3> v{};
    for (std::size_t i = 0; i < 3; ++i) v[i] = parse_real(key, *e, items[i]);
    out = v;
  }

  void ensure_consumed() const {
    for (const auto& [key, entry] : entries_) {
      if (!used_.count(key)) {
        throw InvalidArgumentError(source_ + ":" + std::to_string(entry.second) +
                                   ": unknown key '" + key + "'");
      }
    }
  }

 private:
  const std::pair<std::string, int>* find(const std::string& key) {
    used_.insert(key);
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }

  double parse_real(const std::string& key, const std::pair<std::string, int>& e,
                    const std::string& text) {
    std::size_t consumed = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &consumed);
    } catch (const std::exception&) {
      fail(key, e, "a number");
    }
    if (consumed != text.size() || !std::isfinite(v)) fail(key, e, "a finite number");
    return v;
  }

  [[noreturn]] void fail(const std::string& key, const std::pair<std::string, int>& e,
                         const std::string& expected) const {
    throw InvalidArgumentError(source_ + ":" + std::to_string(e.second) + ": '" + key +
                               "' must be " + expected + ", got '" + e.first + "'");
  }

  std::string source_;
  std::map<std::string, std::pair<std::string, int>> entries_;
  std::set<std::string> used_;
};

const std::set<std::string> kSections = {"run", "model", "ansatz", "generator", "federated", "data"};

}  // namespace

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw InvalidArgumentError("config: " + msg); };
  if (output_dir.empty()) fail("run.output_dir must not be empty");
  if (model_preset != "mlp_tiny" && model_preset != "vgg_small") {
    fail("model.preset must be mlp_tiny or vgg_small, got '" + model_preset + "'");
  }
  if (ansatz_layers < 1) fail("ansatz.layers must be >= 1");
  if (n_mlp < 1) fail("generator.n_mlp must be >= 1");
  for (auto h : hidden) {
    if (h == 0) fail("generator.hidden widths must be positive");
  }
  if (clients < 1 || rounds < 1 || local_epochs < 1 || batch_size < 1 || threads < 1) {
    fail("federated.clients, rounds, local_epochs, batch_size and threads must be >= 1");
  }
  if (!(learning_rate > 0.0)) fail("federated.learning_rate must be > 0");
  if (aggregation != "uniform" && aggregation != "size_weighted") {
    fail("federated.aggregation must be uniform or size_weighted");
  }
  if (data_source == "blobs") {
    if (blob_classes < 2) fail("data.classes must be >= 2");
    if (blob_per_class < 5) fail("data.per_class must be >= 5");
    if (blob_input_dim < static_cast<std::size_t>(blob_classes)) {
      fail("data.input_dim must be >= data.classes");
    }
    if (blob_separation < 0.0) fail("data.separation must be >= 0");
    if (model_preset == "vgg_small") fail("vgg_small needs data.source = cifar10");
  } else if (data_source == "cifar10") {
    if (cifar_dir.empty()) fail("data.cifar_dir is required for cifar10");
    if (norm_mean.has_value() != norm_std.has_value()) {
      fail("data.norm_mean and data.norm_std must be given together");
    }
    if (norm_std) {
      for (double s : *norm_std) {
        if (!(s > 0.0)) fail("data.norm_std entries must be > 0");
      }
    }
  } else {
    fail("data.source must be blobs or cifar10, got '" + data_source + "'");
  }
  if (data_source == "blobs" && static_cast<std::size_t>(clients) > (4 * blob_per_class) / 5 * blob_classes) {
    fail("more clients than training samples");
  }
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  std::map<std::string, std::pair<std::string, int>> entries;  // "section.key" -> (value, line)
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    if (t.front() == '[') {
      if (t.back() != ']') throw InvalidArgumentError(where + "unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      if (!kSections.count(section)) throw InvalidArgumentError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw InvalidArgumentError(where + "expected 'key = value'");
    if (section.empty()) throw InvalidArgumentError(where + "entry outside of any section");
    const std::string key = section + "." + trim(t.substr(0, eq));
    if (!entries.emplace(key, std::make_pair(trim(t.substr(eq + 1)), line_no)).second) {
      throw InvalidArgumentError(where + "duplicate key '" + key + "'");
    }
  }

  RunConfig c;
  Reader r(source, std::move(entries));
  r.integer("run.seed", c.seed);
  r.string("run.output_dir", c.output_dir);
  r.string("model.preset", c.model_preset);
  r.integer("ansatz.layers", c.ansatz_layers);
  r.integer("generator.n_mlp", c.n_mlp);
  r.size_list("generator.hidden", c.hidden);
  r.integer("federated.clients", c.clients);
  r.integer("federated.rounds", c.rounds);
  r.integer("federated.local_epochs", c.local_epochs);
  r.integer("federated.batch_size", c.batch_size);
  r.real("federated.learning_rate", c.learning_rate);
  r.string("federated.aggregation", c.aggregation);
  r.integer("federated.threads", c.threads);
  r.string("data.source", c.data_source);
  r.integer("data.classes", c.blob_classes);
  r.integer("data.per_class", c.blob_per_class);
  r.integer("data.input_dim", c.blob_input_dim);
  r.real("data.separation", c.blob_separation);
  r.integer("data.data_seed", c.data_seed);
  r.string("data.cifar_dir", c.cifar_dir);
  r.integer("data.train_subset", c.cifar_train_subset);
  r.integer("data.test_subset", c.cifar_test_subset);
  r.integer("data.subset_seed", c.subset_seed);
  r.triple("data.norm_mean", c.norm_mean);
  r.triple("data.norm_std", c.norm_std);
  r.ensure_consumed();
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgumentError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

std::string to_ini(const RunConfig& c) {
  std::ostringstream os;
  auto list = [](const auto& values, auto fmt) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) s += (i ? "," : "") + fmt(values[i]);
    return s;
  };
  auto as_int = [](std::size_t v) { return std::to_string(v); };
  os << "[run]\n"
     << "seed = " << c.seed << "\n"
     << "output_dir = " << c.output_dir << "\n\n"
     << "[model]\n"
     << "preset = " << c.model_preset << "\n\n"
     << "[ansatz]\n"
     << "layers = " << c.ansatz_layers << "\n\n"
     << "[generator]\n"
     << "n_mlp = " << c.n_mlp << "\n"
     << "hidden = " << list(c.hidden, as_int) << "\n\n"
     << "[federated]\n"
     << "clients = " << c.clients << "\n"
     << "rounds = " << c.rounds << "\n"
     << "local_epochs = " << c.local_epochs << "\n"
     << "batch_size = " << c.batch_size << "\n"
     << "learning_rate = " << format_double(c.learning_rate) << "\n"
     << "aggregation = " << c.aggregation << "\n"
     << "threads = " << c.threads << "\n\n"
     << "[data]\n"
     << "source = " << c.data_source << "\n";
  if (c.data_source == "blobs") {
    os << "classes = " << c.blob_classes << "\n"
       << "per_class = " << c.blob_per_class << "\n"
       << "input_dim = " << c.blob_input_dim << "\n"
       << "separation = " << format_double(c.blob_separation) << "\n"
       << "data_seed = " << c.data_seed << "\n";
  } else {
    os << "cifar_dir = " << c.cifar_dir << "\n"
       << "train_subset = " << c.cifar_train_subset << "\n"
       << "test_subset = " << c.cifar_test_subset << "\n"
       << "subset_seed = " << c.subset_seed << "\n";
    if (c.norm_mean) os << "norm_mean = " << list(*c.norm_mean, format_double) << "\n";
    if (c.norm_std) os << "norm_std = " << list(*c.norm_std, format_double) << "\n";
  }
  return os.str();
}

nn::Shape sample_shape(const RunConfig& c) {
  if (c.data_source == "cifar10") return {3, 32, 32};
  return {c.blob_input_dim};
}

int class_count(const RunConfig& c) { return c.data_source == "cifar10" ? 10 : c.blob_classes; }

nn::ModelSpec make_target(const RunConfig& c) {
  return nn::make_preset(c.model_preset, sample_shape(c), static_cast<std::size_t>(class_count(c)));
}

data::TrainTest load_data(RunConfig& c) {
  if (c.data_source == "blobs") {
    return data::synthetic_blobs(c.blob_classes, c.blob_per_class, c.blob_input_dim,
                                 c.blob_separation, c.data_seed);
  }
  std::optional<data::ChannelStats> stats;
  if (c.norm_mean && c.norm_std) stats = data::ChannelStats{*c.norm_mean, *c.norm_std};
  data::Cifar10 cifar = data::load_cifar10(c.cifar_dir, stats);
  c.norm_mean = cifar.stats.mean;
  c.norm_std = cifar.stats.stddev;
  data::TrainTest out{std::move(cifar.train), std::move(cifar.test)};
  if (c.cifar_train_subset > 0) out.train = data::subsample(out.train, c.cifar_train_subset, c.subset_seed);
  if (c.cifar_test_subset > 0) out.test = data::subsample(out.test, c.cifar_test_subset, c.subset_seed + 1);
  return out;
}

}  // namespace fqt::cli
