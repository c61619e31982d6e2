#include "techcast/config.hpp"

#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <variant>

#include <fmt/format.h>

namespace techcast::cli {
namespace {

struct Value {
    std::string text;  // unquoted scalar or string contents
    bool quoted = false;
    bool is_array = false;
    std::vector<Value> items;
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Removes a trailing '#' comment that is not inside quotes.
std::string_view strip_comment(std::string_view s) {
    bool in_quotes = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') in_quotes = !in_quotes;
        if (s[i] == '#' && !in_quotes) return s.substr(0, i);
    }
    return s;
}

Value parse_scalar(std::string_view s, std::size_t lineno) {
    s = trim(s);
    Value v;
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        v.quoted = true;
        v.text = std::string(s.substr(1, s.size() - 2));
        if (v.text.find('"') != std::string::npos)
            throw std::invalid_argument(fmt::format("config line {}: embedded quote", lineno));
        return v;
    }
    if (s.empty()) throw std::invalid_argument(fmt::format("config line {}: empty value", lineno));
    v.text = std::string(s);
    return v;
}

Value parse_value(std::string_view s, std::size_t lineno) {
    s = trim(s);
    if (!s.empty() && s.front() == '[') {
        if (s.back() != ']') throw std::invalid_argument(fmt::format("config line {}: unterminated array", lineno));
        Value v;
        v.is_array = true;
        auto inner = trim(s.substr(1, s.size() - 2));
        while (!inner.empty()) {
            const auto comma = inner.find(',');
            v.items.push_back(parse_scalar(inner.substr(0, comma), lineno));
            if (comma == std::string_view::npos) break;
            inner = trim(inner.substr(comma + 1));
        }
        return v;
    }
    return parse_scalar(s, lineno);
}

std::string quote(const std::string& s) { return "\"" + s + "\""; }

double to_double(const Value& v, const std::string& key) {
    if (v.quoted || v.is_array) throw std::invalid_argument("config: " + key + " must be a number");
    std::size_t used = 0;
    const double d = std::stod(v.text, &used);
    if (used != v.text.size()) throw std::invalid_argument("config: " + key + " must be a number");
    return d;
}

std::uint64_t to_uint(const Value& v, const std::string& key) {
    if (v.quoted || v.is_array || v.text.empty() || v.text.front() == '-')
        throw std::invalid_argument("config: " + key + " must be a non-negative integer");
    std::size_t used = 0;
    const auto u = std::stoull(v.text, &used);
    if (used != v.text.size()) throw std::invalid_argument("config: " + key + " must be a non-negative integer");
    return u;
}

std::string to_str(const Value& v, const std::string& key) {
    if (v.is_array) throw std::invalid_argument("config: " + key + " must be a string");
    return v.text;
}

bool to_bool(const Value& v, const std::string& key) {
    if (!v.quoted && v.text == "true") return true;
    if (!v.quoted && v.text == "false") return false;
    throw std::invalid_argument("config: " + key + " must be true or false");
}

std::vector<Value> to_list(const Value& v) { return v.is_array ? v.items : std::vector<Value>{v}; }

std::string methods_text(const std::vector<eval::Method>& ms) {
    std::string out = "[";
    for (std::size_t i = 0; i < ms.size(); ++i) out += (i ? ", " : "") + quote(std::string(eval::to_string(ms[i])));
    return out + "]";
}

std::string fmt_real(double v) {
    auto s = fmt::format("{}", v);
    if (s.find_first_of(".e") == std::string::npos) s += ".0";
    return s;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (min_length < 1) throw std::invalid_argument("min_length must be >= 1");
    for (double f : {validation_fraction, test_fraction})
        if (!(f > 0.0 && f < 0.5)) throw std::invalid_argument("split fractions must lie in (0, 0.5)");
    if (output_dir.empty()) throw std::invalid_argument("output_dir must be non-empty");
    if (corpus_path.empty() && series_path.empty())
        throw std::invalid_argument("one of corpus_path / series_path is required");
    if (scurve_max_iterations < 1) throw std::invalid_argument("scurve.max_iterations must be >= 1");
    if (!(scurve_initial_lambda > 0.0)) throw std::invalid_argument("scurve.initial_lambda must be positive");
    if (arima_restarts < 1) throw std::invalid_argument("arima.restarts must be >= 1");
    if (rnn_cells.empty() || rnn_hidden_sizes.empty()) throw std::invalid_argument("rnn grid must be non-empty");
    for (auto h : rnn_hidden_sizes)
        if (h == 0) throw std::invalid_argument("rnn.hidden_sizes must be positive");
    base_model_config().validate();
}

deep::ModelConfig ExperimentConfig::base_model_config() const {
    deep::ModelConfig c;
    c.cell = rnn_cells.empty() ? deep::CellType::LSTM : rnn_cells.front();
    c.hidden_size = rnn_hidden_sizes.empty() ? 32 : rnn_hidden_sizes.front();
    c.batch_size = rnn_batch_size;
    c.learning_rate = rnn_learning_rate;
    c.epochs = rnn_epochs;
    c.seed = seed;
    c.mc_samples = rnn_mc_samples;
    return c;
}

ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig c;
    using Setter = std::function<void(const Value&, const std::string&)>;
    const std::map<std::string, Setter> setters{
        {"corpus_path", [&](const Value& v, const std::string& k) { c.corpus_path = to_str(v, k); }},
        {"series_path", [&](const Value& v, const std::string& k) { c.series_path = to_str(v, k); }},
        {"output_dir", [&](const Value& v, const std::string& k) { c.output_dir = to_str(v, k); }},
        {"min_length", [&](const Value& v, const std::string& k) { c.min_length = to_uint(v, k); }},
        {"seed", [&](const Value& v, const std::string& k) { c.seed = to_uint(v, k); }},
        {"split.validation_fraction",
         [&](const Value& v, const std::string& k) { c.validation_fraction = to_double(v, k); }},
        {"split.test_fraction", [&](const Value& v, const std::string& k) { c.test_fraction = to_double(v, k); }},
        {"methods",
         [&](const Value& v, const std::string&) {
             c.methods.clear();
             for (const auto& item : to_list(v)) {
                 const auto m = eval::method_from_string(item.text);
                 if (std::find(c.methods.begin(), c.methods.end(), m) == c.methods.end()) c.methods.push_back(m);
             }
         }},
        {"write_plots", [&](const Value& v, const std::string& k) { c.write_plots = to_bool(v, k); }},
        {"scurve.max_iterations",
         [&](const Value& v, const std::string& k) { c.scurve_max_iterations = static_cast<int>(to_uint(v, k)); }},
        {"scurve.initial_lambda", [&](const Value& v, const std::string& k) { c.scurve_initial_lambda = to_double(v, k); }},
        {"scurve.relative_tolerance",
         [&](const Value& v, const std::string& k) { c.scurve_relative_tolerance = to_double(v, k); }},
        {"arima.restarts",
         [&](const Value& v, const std::string& k) { c.arima_restarts = static_cast<int>(to_uint(v, k)); }},
        {"rnn.cells",
         [&](const Value& v, const std::string&) {
             c.rnn_cells.clear();
             for (const auto& item : to_list(v)) c.rnn_cells.push_back(deep::cell_type_from_string(item.text));
         }},
        {"rnn.hidden_sizes",
         [&](const Value& v, const std::string& k) {
             c.rnn_hidden_sizes.clear();
             for (const auto& item : to_list(v)) c.rnn_hidden_sizes.push_back(to_uint(item, k));
         }},
        {"rnn.epochs", [&](const Value& v, const std::string& k) { c.rnn_epochs = to_uint(v, k); }},
        {"rnn.batch_size", [&](const Value& v, const std::string& k) { c.rnn_batch_size = to_uint(v, k); }},
        {"rnn.learning_rate", [&](const Value& v, const std::string& k) { c.rnn_learning_rate = to_double(v, k); }},
        {"rnn.mc_samples", [&](const Value& v, const std::string& k) { c.rnn_mc_samples = to_uint(v, k); }},
    };

    std::istringstream in{std::string(text)};
    std::string raw;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = std::string(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw std::invalid_argument(fmt::format("config line {}: expected key = value", lineno));
        std::string key(trim(line.substr(0, eq)));
        if (!section.empty()) key = section + "." + key;
        const auto it = setters.find(key);
        if (it == setters.end()) throw std::invalid_argument(fmt::format("config line {}: unknown key '{}'", lineno, key));
        it->second(parse_value(line.substr(eq + 1), lineno), key);
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    auto config = parse_config(ss.str());
    const auto base = path.parent_path();
    for (auto* p : {&config.corpus_path, &config.series_path})
        if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
    return config;
}

std::string to_text(const ExperimentConfig& c) {
    std::string cells = "[";
    for (std::size_t i = 0; i < c.rnn_cells.size(); ++i)
        cells += (i ? ", " : "") + quote(std::string(deep::to_string(c.rnn_cells[i])));
    cells += "]";
    std::string hidden = "[";
    for (std::size_t i = 0; i < c.rnn_hidden_sizes.size(); ++i)
        hidden += (i ? ", " : "") + std::to_string(c.rnn_hidden_sizes[i]);
    hidden += "]";

    std::string out;
    out += "# techcast experiment (all defaults materialized)\n";
    out += fmt::format("corpus_path = {}\n", quote(c.corpus_path));
    out += fmt::format("series_path = {}\n", quote(c.series_path));
    out += fmt::format("output_dir = {}\n", quote(c.output_dir));
    out += fmt::format("min_length = {}\n", c.min_length);
    out += fmt::format("seed = {}\n", c.seed);
    out += fmt::format("methods = {}\n", methods_text(c.methods));
    out += fmt::format("write_plots = {}\n", c.write_plots ? "true" : "false");
    out += "\n[split]\n";
    out += fmt::format("validation_fraction = {}\n", fmt_real(c.validation_fraction));
    out += fmt::format("test_fraction = {}\n", fmt_real(c.test_fraction));
    out += "\n[scurve]\n";
    out += fmt::format("max_iterations = {}\n", c.scurve_max_iterations);
    out += fmt::format("initial_lambda = {}\n", fmt_real(c.scurve_initial_lambda));
    out += fmt::format("relative_tolerance = {}\n", fmt_real(c.scurve_relative_tolerance));
    out += "\n[arima]\n";
    out += fmt::format("restarts = {}\n", c.arima_restarts);
    out += "\n[rnn]\n";
    out += fmt::format("cells = {}\n", cells);
    out += fmt::format("hidden_sizes = {}\n", hidden);
    out += fmt::format("epochs = {}\n", c.rnn_epochs);
    out += fmt::format("batch_size = {}\n", c.rnn_batch_size);
    out += fmt::format("learning_rate = {}\n", fmt_real(c.rnn_learning_rate));
    out += fmt::format("mc_samples = {}\n", c.rnn_mc_samples);
    return out;
}

}  // namespace techcast::cli
