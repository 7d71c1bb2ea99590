#include "spec_file.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cvi/models.h"

namespace cvi::cli {
namespace {

using nlohmann::json;

// Input iterator over the spec text that remembers how far the lexer has
// read, so SAX events can be tagged with a line number.
class TrackingIterator {
 public:
  using iterator_category = std::input_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  TrackingIterator(const char* p, const char** furthest)
      : p_(p), furthest_(furthest) {}
  reference operator*() const { return *p_; }
  TrackingIterator& operator++() {
    ++p_;
    if (p_ > *furthest_) *furthest_ = p_;
    return *this;
  }
  TrackingIterator operator++(int) {
    TrackingIterator old = *this;
    ++*this;
    return old;
  }
  bool operator==(const TrackingIterator& o) const { return p_ == o.p_; }
  bool operator!=(const TrackingIterator& o) const { return p_ != o.p_; }

 private:
  const char* p_;
  const char** furthest_;
};

std::string EscapeToken(const std::string& token) {
  std::string out;
  for (char c : token) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

// Builds the DOM and a pointer -> line table in one pass.
class LocatingSax : public nlohmann::json_sax<json> {
 public:
  LocatingSax(const std::string& text, const char** furthest,
              std::map<std::string, int>* lines)
      : text_(text), furthest_(furthest), lines_(lines) {}

  json root;
  std::string error;

  bool null() override { return Put(nullptr); }
  bool boolean(bool v) override { return Put(v); }
  bool number_integer(number_integer_t v) override { return Put(v); }
  bool number_unsigned(number_unsigned_t v) override { return Put(v); }
  bool number_float(number_float_t v, const string_t&) override {
    return Put(v);
  }
  bool string(string_t& v) override { return Put(v); }
  bool binary(binary_t&) override { return Put(nullptr); }
  bool start_object(std::size_t) override { return Open(json::object()); }
  bool end_object() override { return Close(); }
  bool start_array(std::size_t) override { return Open(json::array()); }
  bool end_array() override { return Close(); }
  bool key(string_t& k) override {
    if (stack_.back()->contains(k)) {
      error = std::to_string(Line()) + ": " + pointers_.back() + "/" +
              EscapeToken(k) + ": duplicate key";
      return false;
    }
    key_ = k;
    lines_->emplace(pointers_.back() + "/" + EscapeToken(k), Line());
    return true;
  }
  bool parse_error(std::size_t position, const std::string&,
                   const nlohmann::detail::exception& ex) override {
    std::string what = ex.what();
    // Drop the library's "[json.exception.parse_error.101] " prefix.
    if (auto pos = what.find("] "); pos != std::string::npos) {
      what = what.substr(pos + 2);
    }
    error = std::to_string(LineAt(position)) + ": " + what;
    return false;
  }

 private:
  int LineAt(std::size_t offset) const {
    offset = std::min(offset, text_.size());
    return 1 + static_cast<int>(std::count(text_.begin(),
                                           text_.begin() + offset, '\n'));
  }
  int Line() const {
    return LineAt(static_cast<std::size_t>(*furthest_ - text_.data()));
  }

  json* Insert(json value, std::string* pointer) {
    if (stack_.empty()) {
      root = std::move(value);
      *pointer = "";
      lines_->emplace("", Line());
      return &root;
    }
    json& parent = *stack_.back();
    if (parent.is_object()) {
      *pointer = pointers_.back() + "/" + EscapeToken(key_);
      parent[key_] = std::move(value);
      return &parent[key_];
    }
    *pointer = pointers_.back() + "/" + std::to_string(parent.size());
    lines_->emplace(*pointer, Line());
    parent.push_back(std::move(value));
    return &parent.back();
  }
  bool Put(json value) {
    std::string pointer;
    Insert(std::move(value), &pointer);
    return true;
  }
  bool Open(json value) {
    std::string pointer;
    json* slot = Insert(std::move(value), &pointer);
    stack_.push_back(slot);
    pointers_.push_back(pointer);
    return true;
  }
  bool Close() {
    stack_.pop_back();
    pointers_.pop_back();
    return true;
  }

  const std::string& text_;
  const char** furthest_;
  std::map<std::string, int>* lines_;
  std::vector<json*> stack_;
  std::vector<std::string> pointers_;
  std::string key_;
};

// Typed accessors that report failures with source, line and pointer.
class Reader {
 public:
  Reader(std::string source, std::map<std::string, int> lines)
      : source_(std::move(source)), lines_(std::move(lines)) {}

  [[noreturn]] void Fail(const std::string& pointer,
                         const std::string& message) const {
    std::ostringstream msg;
    msg << source_ << ":" << LineOf(pointer) << ": "
        << (pointer.empty() ? "/" : pointer) << ": " << message;
    throw InputError(msg.str());
  }

  void Object(const json& j, const std::string& ptr,
              const std::set<std::string>& allowed,
              const std::set<std::string>& required = {}) const {
    if (!j.is_object()) Fail(ptr, "expected an object");
    for (const auto& [key, value] : j.items()) {
      if (!allowed.count(key)) {
        Fail(ptr + "/" + EscapeToken(key), "unknown field \"" + key + "\"");
      }
    }
    for (const auto& key : required) {
      if (!j.contains(key)) Fail(ptr, "missing required field \"" + key + "\"");
    }
  }

  double Number(const json& j, const std::string& ptr) const {
    if (!j.is_number()) Fail(ptr, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) Fail(ptr, "expected a finite number");
    return v;
  }

  std::int64_t Integer(const json& j, const std::string& ptr) const {
    if (!j.is_number_integer()) Fail(ptr, "expected an integer");
    return j.get<std::int64_t>();
  }

  std::uint64_t Unsigned(const json& j, const std::string& ptr) const {
    if (!j.is_number_unsigned()) Fail(ptr, "expected a nonnegative integer");
    return j.get<std::uint64_t>();
  }

  bool Bool(const json& j, const std::string& ptr) const {
    if (!j.is_boolean()) Fail(ptr, "expected true or false");
    return j.get<bool>();
  }

  std::string String(const json& j, const std::string& ptr) const {
    if (!j.is_string()) Fail(ptr, "expected a string");
    return j.get<std::string>();
  }

  Point Vector(const json& j, const std::string& ptr) const {
    if (!j.is_array() || j.empty()) Fail(ptr, "expected a non-empty array");
    Point v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
      v(static_cast<Index>(i)) = Number(j[i], ptr + "/" + std::to_string(i));
    }
    return v;
  }

  Matrix MatrixOf(const json& j, const std::string& ptr) const {
    if (!j.is_array() || j.empty()) {
      Fail(ptr, "expected a non-empty array of rows");
    }
    const Index rows = static_cast<Index>(j.size());
    Index cols = -1;
    Matrix M;
    for (Index r = 0; r < rows; ++r) {
      const std::string row_ptr = ptr + "/" + std::to_string(r);
      const Point row = Vector(j[r], row_ptr);
      if (cols < 0) {
        cols = row.size();
        M.resize(rows, cols);
      } else if (row.size() != cols) {
        Fail(row_ptr, "row has " + std::to_string(row.size()) +
                          " entries, expected " + std::to_string(cols));
      }
      M.row(r) = row.transpose();
    }
    return M;
  }

  std::vector<std::string> Strings(const json& j, const std::string& ptr) const {
    if (!j.is_array()) Fail(ptr, "expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
      out.push_back(String(j[i], ptr + "/" + std::to_string(i)));
    }
    return out;
  }

 private:
  int LineOf(std::string pointer) const {
    while (true) {
      if (auto it = lines_.find(pointer); it != lines_.end()) return it->second;
      if (pointer.empty()) return 1;
      pointer = pointer.substr(0, pointer.rfind('/'));
    }
  }

  std::string source_;
  std::map<std::string, int> lines_;
};

FeasibleSet ParseSet(const Reader& r, const json& j, const std::string& ptr,
                     Index dimension) {
  if (!j.is_object() || !j.contains("type")) {
    r.Fail(ptr, "set needs a \"type\"");
  }
  const std::string type = r.String(j["type"], ptr + "/type");
  try {
    if (type == "box") {
      r.Object(j, ptr, {"type", "lower", "upper"}, {"lower", "upper"});
      return FeasibleSet::Box(r.Vector(j["lower"], ptr + "/lower"),
                              r.Vector(j["upper"], ptr + "/upper"));
    }
    if (type == "orthant") {
      r.Object(j, ptr, {"type", "dimension"});
      Index n = dimension;
      if (j.contains("dimension")) n = r.Integer(j["dimension"], ptr + "/dimension");
      return FeasibleSet::NonnegativeOrthant(n);
    }
    if (type == "simplex") {
      r.Object(j, ptr, {"type", "radius", "dimension"}, {"radius"});
      Index n = dimension;
      if (j.contains("dimension")) n = r.Integer(j["dimension"], ptr + "/dimension");
      return FeasibleSet::Simplex(r.Number(j["radius"], ptr + "/radius"), n);
    }
    if (type == "polyhedron") {
      r.Object(j, ptr, {"type", "B", "b", "nonnegative"}, {"B", "b"});
      const bool nonneg =
          j.contains("nonnegative") ? r.Bool(j["nonnegative"], ptr + "/nonnegative")
                                    : true;
      return FeasibleSet::Polyhedron(r.MatrixOf(j["B"], ptr + "/B"),
                                     r.Vector(j["b"], ptr + "/b"), nonneg);
    }
    if (type == "product") {
      r.Object(j, ptr, {"type", "parts"}, {"parts"});
      const json& parts = j["parts"];
      if (!parts.is_array() || parts.empty()) {
        r.Fail(ptr + "/parts", "expected a non-empty array of sets");
      }
      std::vector<FeasibleSet> sets;
      for (std::size_t i = 0; i < parts.size(); ++i) {
        sets.push_back(ParseSet(r, parts[i],
                                ptr + "/parts/" + std::to_string(i), -1));
      }
      return FeasibleSet::Product(sets);
    }
  } catch (const cvi::Error& e) {
    r.Fail(ptr, e.what());
  }
  r.Fail(ptr + "/type", "unknown set type \"" + type + "\"");
}

NoiseModel ParseNoiseFields(const Reader& r, const json& j,
                            const std::string& ptr, Index length) {
  NoiseModel noise = NoiseModel::Gaussian(length, 0.0, 0);
  if (j.contains("stddev")) {
    const double s = r.Number(j["stddev"], ptr + "/stddev");
    if (s < 0.0) r.Fail(ptr + "/stddev", "stddev must be >= 0");
    noise.stddev.setConstant(s);
  }
  if (j.contains("seed")) noise.seed = r.Unsigned(j["seed"], ptr + "/seed");
  if (j.contains("mean")) {
    noise.mean = r.Vector(j["mean"], ptr + "/mean");
    if (noise.mean.size() != length) {
      r.Fail(ptr + "/mean", "expected " + std::to_string(length) + " entries");
    }
  }
  return noise;
}

struct Model {
  std::string name;
  Problem problem;
};

// Applies a top-level "noise" block: per-block for the economy, one
// additive Gaussian on the whole field otherwise.
Model ParseModel(const Reader& r, const json& doc) {
  const json& j = doc["model"];
  const std::string ptr = "/model";
  if (!j.is_object() || !j.contains("name")) {
    r.Fail(ptr, "model needs a \"name\"");
  }
  const std::string name = r.String(j["name"], ptr + "/name");
  const bool has_set = doc.contains("set");
  if (has_set && name != "affine") {
    r.Fail("/set", "\"set\" is only allowed with the affine model");
  }
  if (doc.contains("labels") && name != "affine") {
    r.Fail("/labels", "\"labels\" is only allowed with the affine model");
  }
  const json* noise = doc.contains("noise") ? &doc["noise"] : nullptr;
  if (noise != nullptr) {
    r.Object(*noise, "/noise", {"stddev", "seed"}, {"stddev"});
  }

  try {
    if (name == "braess") {
      r.Object(j, ptr, {"name", "demand", "slopes", "constants"});
      BraessSpec spec;
      if (j.contains("demand")) spec.demand = r.Number(j["demand"], ptr + "/demand");
      if (j.contains("slopes")) spec.slopes = r.Vector(j["slopes"], ptr + "/slopes");
      if (j.contains("constants")) {
        spec.constants = r.Vector(j["constants"], ptr + "/constants");
      }
      Problem p = BuildBraess(spec);
      if (noise != nullptr) {
        p = p.WithMapping(Mapping::Stochastic(
            p.mapping(), ParseNoiseFields(r, *noise, "/noise", 5)));
      }
      return {"braess", p};
    }
    if (name == "economy" || name == "economy_2x1x2") {
      r.Object(j, ptr,
               {"name", "m", "n", "o", "prod_quad", "prod_lin", "demand_const",
                "demand_Q", "demand_q", "transport_weight", "transport_target",
                "opportunity_weight"});
      EconomySpec spec = PaperEconomySpec();
      auto vec = [&](const char* key, Point* out) {
        if (j.contains(key)) *out = r.Vector(j[key], ptr + "/" + key);
      };
      auto mat = [&](const char* key, Matrix* out) {
        if (j.contains(key)) *out = r.MatrixOf(j[key], ptr + "/" + key);
      };
      if (j.contains("m")) spec.m = r.Integer(j["m"], ptr + "/m");
      if (j.contains("n")) spec.n = r.Integer(j["n"], ptr + "/n");
      if (j.contains("o")) spec.o = r.Integer(j["o"], ptr + "/o");
      vec("prod_quad", &spec.prod_quad);
      vec("prod_lin", &spec.prod_lin);
      vec("demand_const", &spec.demand_const);
      mat("demand_Q", &spec.demand_Q);
      mat("demand_q", &spec.demand_q);
      vec("transport_weight", &spec.transport_weight);
      vec("transport_target", &spec.transport_target);
      vec("opportunity_weight", &spec.opportunity_weight);
      if (noise != nullptr) {
        const json& s = (*noise)["stddev"];
        if (s.is_array()) {
          const Point v = r.Vector(s, "/noise/stddev");
          if (v.size() != 3) r.Fail("/noise/stddev", "expected 3 block stddevs");
          spec.noise_stddev = {v(0), v(1), v(2)};
        } else {
          const double v = r.Number(s, "/noise/stddev");
          spec.noise_stddev = {v, v, v};
        }
        for (double v : spec.noise_stddev) {
          if (v < 0.0) r.Fail("/noise/stddev", "stddev must be >= 0");
        }
        if (noise->contains("seed")) {
          spec.noise_seed = r.Unsigned((*noise)["seed"], "/noise/seed");
        }
      }
      return {"economy", BuildEconomy(spec)};
    }
    if (name == "lcp") {
      r.Object(j, ptr, {"name", "M", "q"}, {"M", "q"});
      Problem p = BuildLcp(r.MatrixOf(j["M"], ptr + "/M"),
                           r.Vector(j["q"], ptr + "/q"));
      if (noise != nullptr) {
        p = p.WithMapping(Mapping::Stochastic(
            p.mapping(),
            ParseNoiseFields(r, *noise, "/noise", p.dimension())));
      }
      return {"lcp", p};
    }
    if (name == "saddle") {
      r.Object(j, ptr, {"name", "A", "lower", "upper"}, {"A", "lower", "upper"});
      Problem p = BuildSaddle(r.MatrixOf(j["A"], ptr + "/A"),
                              r.Vector(j["lower"], ptr + "/lower"),
                              r.Vector(j["upper"], ptr + "/upper"));
      if (noise != nullptr) {
        p = p.WithMapping(Mapping::Stochastic(
            p.mapping(),
            ParseNoiseFields(r, *noise, "/noise", p.dimension())));
      }
      return {"saddle", p};
    }
    if (name == "affine") {
      r.Object(j, ptr, {"name", "M", "c"}, {"M", "c"});
      if (!has_set) r.Fail("", "the affine model needs a \"set\"");
      const Matrix M = r.MatrixOf(j["M"], ptr + "/M");
      const Point c = r.Vector(j["c"], ptr + "/c");
      if (M.rows() != M.cols()) r.Fail(ptr + "/M", "M must be square");
      if (c.size() != M.rows()) {
        r.Fail(ptr + "/c", "expected " + std::to_string(M.rows()) + " entries");
      }
      Mapping F = Mapping::Affine(M, c);
      if (noise != nullptr) {
        F = Mapping::Stochastic(F, ParseNoiseFields(r, *noise, "/noise", c.size()));
      }
      FeasibleSet K = ParseSet(r, doc["set"], "/set", M.rows());
      if (K.dimension() != M.rows()) {
        r.Fail("/set", "set dimension " + std::to_string(K.dimension()) +
                           " does not match the mapping dimension " +
                           std::to_string(M.rows()));
      }
      std::vector<std::string> labels;
      if (doc.contains("labels")) {
        labels = r.Strings(doc["labels"], "/labels");
        if (static_cast<Index>(labels.size()) != M.rows()) {
          r.Fail("/labels", "expected " + std::to_string(M.rows()) + " labels");
        }
      }
      return {"affine", Problem(F, K, labels)};
    }
  } catch (const InputError&) {
    throw;
  } catch (const cvi::Error& e) {
    r.Fail(ptr, e.what());
  }
  r.Fail(ptr + "/name", "unknown model \"" + name + "\"");
}

Index CoordinateIndex(const Reader& r, const json& j, const std::string& ptr,
                      const Problem& problem) {
  if (j.is_string()) {
    const auto found = problem.FindLabel(j.get<std::string>());
    if (!found) r.Fail(ptr, "unknown label \"" + j.get<std::string>() + "\"");
    return *found;
  }
  const std::int64_t i = r.Integer(j, ptr);
  if (i < 0 || i >= problem.dimension()) {
    r.Fail(ptr, "index " + std::to_string(i) + " out of range [0, " +
                    std::to_string(problem.dimension()) + ")");
  }
  return static_cast<Index>(i);
}

Index ComponentIndex(const Reader& r, const json& j, const std::string& ptr,
                     const Problem& problem) {
  const std::int64_t i = r.Integer(j, ptr);
  if (i < 0 || i >= problem.mapping().num_components()) {
    r.Fail(ptr, "component " + std::to_string(i) + " out of range [0, " +
                    std::to_string(problem.mapping().num_components()) + ")");
  }
  return static_cast<Index>(i);
}

Intervention ParseIntervention(const Reader& r, const json& j,
                               const std::string& ptr, const Problem& problem) {
  if (!j.is_object() || !j.contains("type")) {
    r.Fail(ptr, "intervention needs a \"type\"");
  }
  const std::string type = r.String(j["type"], ptr + "/type");
  if (type == "clamp") {
    r.Object(j, ptr, {"type", "index", "value"}, {"index", "value"});
    return ClampVariable{CoordinateIndex(r, j["index"], ptr + "/index", problem),
                         r.Number(j["value"], ptr + "/value")};
  }
  if (type == "shift") {
    r.Object(j, ptr, {"type", "index", "delta"}, {"index", "delta"});
    return ShiftConstant{CoordinateIndex(r, j["index"], ptr + "/index", problem),
                         r.Number(j["delta"], ptr + "/delta")};
  }
  if (type == "noise") {
    r.Object(j, ptr, {"type", "component", "stddev", "seed", "mean"},
             {"component", "stddev"});
    const Index c = ComponentIndex(r, j["component"], ptr + "/component", problem);
    const Index length = problem.mapping().ComponentRange(c).second;
    return SetNoise{c, ParseNoiseFields(r, j, ptr, length)};
  }
  if (type == "replace") {
    r.Object(j, ptr, {"type", "component", "M", "c"}, {"component", "M", "c"});
    const Index c = ComponentIndex(r, j["component"], ptr + "/component", problem);
    const Matrix M = r.MatrixOf(j["M"], ptr + "/M");
    const Point offset = r.Vector(j["c"], ptr + "/c");
    try {
      return ReplaceComponent{c, Mapping::Affine(M, offset)};
    } catch (const cvi::Error& e) {
      r.Fail(ptr, e.what());
    }
  }
  r.Fail(ptr + "/type", "unknown intervention type \"" + type + "\"");
}

StepSchedule ParseSchedule(const Reader& r, const json& j,
                           const std::string& ptr) {
  if (!j.is_object() || !j.contains("type")) {
    r.Fail(ptr, "schedule needs a \"type\"");
  }
  const std::string type = r.String(j["type"], ptr + "/type");
  if (type == "constant") {
    r.Object(j, ptr, {"type", "alpha", "beta"}, {"alpha"});
    const double beta = j.contains("beta") ? r.Number(j["beta"], ptr + "/beta") : 1.0;
    return StepSchedule::Constant(r.Number(j["alpha"], ptr + "/alpha"), beta);
  }
  if (type == "polynomial") {
    r.Object(j, ptr, {"type", "a", "b", "beta"}, {"a", "b"});
    const double beta = j.contains("beta") ? r.Number(j["beta"], ptr + "/beta") : 1.0;
    return StepSchedule::Polynomial(r.Number(j["a"], ptr + "/a"),
                                    r.Number(j["b"], ptr + "/b"), beta);
  }
  r.Fail(ptr + "/type", "unknown schedule type \"" + type + "\"");
}

SolverConfig ParseSolver(const Reader& r, const json& j, const Problem& problem,
                         bool* seed_given) {
  const std::string ptr = "/solver";
  r.Object(j, ptr,
           {"algorithm", "schedule", "tol", "max_iter", "seed", "x0",
            "check_interval", "prioritize"});
  SolverConfig config;
  if (j.contains("algorithm")) {
    const std::string name = r.String(j["algorithm"], ptr + "/algorithm");
    const auto algorithm = ParseAlgorithm(name);
    if (!algorithm) r.Fail(ptr + "/algorithm", "unknown algorithm \"" + name + "\"");
    config.algorithm = *algorithm;
  }
  if (j.contains("schedule")) {
    config.schedule = ParseSchedule(r, j["schedule"], ptr + "/schedule");
    try {
      if (config.algorithm == Algorithm::kIncremental) {
        config.schedule->ValidateStochastic();
      } else {
        config.schedule->ValidateDeterministic();
      }
    } catch (const cvi::Error& e) {
      r.Fail(ptr + "/schedule", e.what());
    }
  }
  if (j.contains("tol")) {
    config.options.tol = r.Number(j["tol"], ptr + "/tol");
    if (!(config.options.tol > 0.0)) r.Fail(ptr + "/tol", "tol must be > 0");
  }
  if (j.contains("max_iter")) {
    const std::int64_t n = r.Integer(j["max_iter"], ptr + "/max_iter");
    if (n < 1 || n > std::numeric_limits<int>::max()) {
      r.Fail(ptr + "/max_iter", "max_iter must be a positive int");
    }
    config.options.max_iter = static_cast<int>(n);
  }
  if (j.contains("check_interval")) {
    const std::int64_t n = r.Integer(j["check_interval"], ptr + "/check_interval");
    if (n < 1 || n > std::numeric_limits<int>::max()) {
      r.Fail(ptr + "/check_interval", "check_interval must be a positive int");
    }
    config.options.check_interval = static_cast<int>(n);
  }
  if (j.contains("seed")) {
    config.seed = r.Unsigned(j["seed"], ptr + "/seed");
    *seed_given = true;
  }
  if (j.contains("x0")) {
    const Point x0 = r.Vector(j["x0"], ptr + "/x0");
    if (x0.size() != problem.dimension()) {
      r.Fail(ptr + "/x0", "expected " + std::to_string(problem.dimension()) +
                              " entries");
    }
    config.options.x0 = x0;
  }
  if (j.contains("prioritize")) {
    const json& list = j["prioritize"];
    if (!list.is_array()) r.Fail(ptr + "/prioritize", "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      config.prioritized_components.push_back(ComponentIndex(
          r, list[i], ptr + "/prioritize/" + std::to_string(i), problem));
    }
  }
  return config;
}

}  // namespace

SpecFile ParseSpec(const std::string& text, const std::string& source) {
  std::map<std::string, int> lines;
  const char* furthest = text.data();
  LocatingSax sax(text, &furthest, &lines);
  TrackingIterator first(text.data(), &furthest);
  TrackingIterator last(text.data() + text.size(), &furthest);
  const bool ok = json::sax_parse(first, last, &sax);
  if (!ok) {
    throw InputError(source + ":" +
                     (sax.error.empty() ? "1: malformed JSON" : sax.error));
  }
  const json& doc = sax.root;
  const Reader r(source, std::move(lines));
  r.Object(doc, "",
           {"model", "set", "labels", "noise", "interventions", "solver"},
           {"model"});

  Model model = ParseModel(r, doc);
  std::vector<Intervention> interventions;
  if (doc.contains("interventions")) {
    const json& list = doc["interventions"];
    if (!list.is_array()) r.Fail("/interventions", "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      interventions.push_back(ParseIntervention(
          r, list[i], "/interventions/" + std::to_string(i), model.problem));
    }
  }
  Problem intervened = model.problem;
  try {
    intervened = Apply(model.problem, interventions).intervened_problem;
  } catch (const cvi::Error& e) {
    r.Fail("/interventions", e.what());
  }
  bool seed_given = false;
  SolverConfig solver;
  if (doc.contains("solver")) {
    solver = ParseSolver(r, doc["solver"], intervened, &seed_given);
  }
  return SpecFile{source,     model.name, model.problem, std::move(interventions),
                  intervened, solver,     seed_given};
}

SpecFile LoadSpec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open spec file");
  const std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  return ParseSpec(text, path);
}

Intervention ParseDo(const std::string& text, const Problem& problem) {
  const auto fail = [&](const std::string& why) {
    return InputError("invalid --do \"" + text + "\": " + why);
  };
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw fail("expected kind:key=value,...");
  const std::string kind = text.substr(0, colon);
  std::map<std::string, std::string> fields;
  std::stringstream rest(text.substr(colon + 1));
  std::string item;
  while (std::getline(rest, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw fail("bad field \"" + item + "\"");
    if (!fields.emplace(item.substr(0, eq), item.substr(eq + 1)).second) {
      throw fail("repeated field \"" + item.substr(0, eq) + "\"");
    }
  }
  const auto require = [&](const std::set<std::string>& allowed,
                           const std::set<std::string>& required) {
    for (const auto& [key, value] : fields) {
      if (!allowed.count(key)) throw fail("unknown field \"" + key + "\"");
    }
    for (const auto& key : required) {
      if (!fields.count(key)) throw fail("missing field \"" + key + "\"");
    }
  };
  const auto number = [&](const std::string& key) {
    const std::string& s = fields.at(key);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty() || !std::isfinite(v)) {
      throw fail(key + " is not a number");
    }
    return v;
  };
  const auto integer = [&](const std::string& key) -> long long {
    const std::string& s = fields.at(key);
    std::size_t used = 0;
    long long v = -1;
    try {
      v = std::stoll(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw fail(key + " is not an integer");
    return v;
  };
  const auto coordinate = [&]() -> Index {
    const std::string& s = fields.at("index");
    if (const auto found = problem.FindLabel(s)) return *found;
    const long long i = integer("index");
    if (i < 0 || i >= problem.dimension()) throw fail("index out of range");
    return static_cast<Index>(i);
  };

  if (kind == "clamp") {
    require({"index", "value"}, {"index", "value"});
    return ClampVariable{coordinate(), number("value")};
  }
  if (kind == "shift") {
    require({"index", "delta"}, {"index", "delta"});
    return ShiftConstant{coordinate(), number("delta")};
  }
  if (kind == "noise") {
    require({"component", "stddev", "seed"}, {"component", "stddev"});
    const long long c = integer("component");
    if (c < 0 || c >= problem.mapping().num_components()) {
      throw fail("component out of range");
    }
    const double s = number("stddev");
    if (s < 0.0) throw fail("stddev must be >= 0");
    std::uint64_t seed = 0;
    if (fields.count("seed")) {
      const long long v = integer("seed");
      if (v < 0) throw fail("seed must be >= 0");
      seed = static_cast<std::uint64_t>(v);
    }
    const Index length =
        problem.mapping().ComponentRange(static_cast<Index>(c)).second;
    return SetNoise{static_cast<Index>(c), NoiseModel::Gaussian(length, s, seed)};
  }
  throw fail("unknown kind \"" + kind + "\" (use clamp, shift or noise)");
}

}  // namespace cvi::cli
