#include "dirate/model_io.hpp"

#include <charconv>
#include <fstream>
#include <json.hpp>

#include "dirate/output.hpp"

namespace dirate {

namespace {

using nlohmann::ordered_json;

ordered_json read_document(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  try {
    return ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

void write_document(const ordered_json& doc, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
}

std::string field_string(const ordered_json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  throw ValidationError("expected a string or integer symbol");
}

Alphabet read_alphabet(const ordered_json& doc, const char* field) {
  if (!doc.contains(field))
    throw ValidationError(std::string("missing field '") + field + "'");
  std::vector<std::string> names;
  for (const auto& s : doc.at(field)) {
    std::string name = field_string(s);
    if (name.find(',') != std::string::npos)
      throw ValidationError("symbol names may not contain commas: '" + name + "'");
    names.push_back(name);
  }
  return Alphabet(std::move(names));
}

int read_int(const ordered_json& doc, const char* field) {
  if (!doc.contains(field) || !doc.at(field).is_number_integer())
    throw ValidationError(std::string("missing integer field '") + field + "'");
  return doc.at(field).get<int>();
}

double parse_decimal(const ordered_json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string())
    throw ValidationError("expected a decimal string in " + where);
  const std::string& s = j.get_ref<const std::string&>();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ValidationError("bad decimal '" + s + "' in " + where);
  return value;
}

std::string decimal_string(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

Context read_context(const ordered_json& arr, const Alphabet& alpha,
                     const std::string& where) {
  Context ctx;
  for (const auto& s : arr) ctx.push_back(alpha.index_of(field_string(s)));
  (void)where;
  return ctx;
}

// Split a "a,b" pair key on the comma (symbol names exclude commas).
std::pair<std::string, std::string> split_pair_key(const std::string& key) {
  auto pos = key.find(',');
  if (pos == std::string::npos)
    throw ValidationError("joint row key '" + key + "' is not an 'x,xhat' pair");
  return {key.substr(0, pos), key.substr(pos + 1)};
}

// Reads "rows" into a StochasticTable; prob_index maps a key to its slot in
// the dense row.
StochasticTable read_rows(const ordered_json& doc, const Alphabet& context_alpha,
                          int arity, const Alphabet& output_alpha,
                          const std::function<int(const std::string&)>& prob_index,
                          int output_size,
                          const std::function<Context(const ordered_json&)>& ctx_reader =
                              nullptr) {
  StochasticTable table(output_size == output_alpha.size()
                            ? output_alpha
                            : Alphabet::range(output_size),
                        arity);
  if (!doc.contains("rows") || !doc.at("rows").is_array())
    throw ValidationError("missing 'rows' array");
  for (const auto& row : doc.at("rows")) {
    Context ctx = ctx_reader ? ctx_reader(row.at("context"))
                             : read_context(row.at("context"), context_alpha,
                                            "row context");
    Eigen::VectorXd probs = Eigen::VectorXd::Zero(output_size);
    std::string where =
        "row (" + StochasticTable::context_name(ctx, context_alpha) + ")";
    for (const auto& [key, value] : row.at("probs").items()) {
      int slot = prob_index(key);
      probs(slot) = parse_decimal(value, where);
    }
    table.set_row(ctx, probs);
  }
  return table;
}

void check_loaded(const StochasticTable& table, const Alphabet& context_alpha,
                  const std::filesystem::path& path) {
  auto report = validate_table(table, 1e-9);
  if (!report.ok()) {
    const auto& v = report.violations.front();
    std::string msg = "'" + path.string() + "': row (" +
                      StochasticTable::context_name(v.context, context_alpha) + ")";
    if (v.min_entry < 0.0)
      msg += " has negative entry " + std::to_string(v.min_entry);
    else
      msg += " sums to 1 with error " + std::to_string(v.sum_error);
    throw ValidationError(msg);
  }
}

ordered_json rows_to_json(
    const StochasticTable& table, const Alphabet& context_alpha,
    const std::function<std::string(int)>& key_name,
    const std::function<ordered_json(const Context&)>& ctx_writer = nullptr) {
  ordered_json rows = ordered_json::array();
  for (const auto& [ctx, idx] : table.contexts()) {
    ordered_json probs = ordered_json::object();
    auto r = table.row(idx);
    for (Eigen::Index i = 0; i < r.size(); ++i)
      if (r(i) != 0.0) probs[key_name(static_cast<int>(i))] = decimal_string(r(i));
    ordered_json row;
    if (ctx_writer) {
      row["context"] = ctx_writer(ctx);
    } else {
      ordered_json c = ordered_json::array();
      for (int s : ctx) c.push_back(context_alpha.name(s));
      row["context"] = c;
    }
    row["probs"] = std::move(probs);
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json alphabet_to_json(const Alphabet& alpha) {
  ordered_json arr = ordered_json::array();
  for (const auto& name : alpha.names()) arr.push_back(name);
  return arr;
}

}  // namespace

std::string peek_kind(const std::filesystem::path& path) {
  ordered_json doc = read_document(path);
  if (!doc.contains("kind") || !doc.at("kind").is_string())
    throw ValidationError("'" + path.string() + "' has no \"kind\" field");
  return doc.at("kind").get<std::string>();
}

MarkovSourceModel load_source(const std::filesystem::path& path) {
  ordered_json doc = read_document(path);
  int order = read_int(doc, "order");
  Alphabet alpha = read_alphabet(doc, "source_alphabet");
  StochasticTable kernel = read_rows(
      doc, alpha, order, alpha,
      [&](const std::string& key) { return alpha.index_of(key); }, alpha.size());
  check_loaded(kernel, alpha, path);
  return MarkovSourceModel(order, alpha, std::move(kernel));
}

TestChannelModel load_test_channel(const std::filesystem::path& path) {
  ordered_json doc = read_document(path);
  int order = read_int(doc, "order");
  Alphabet source = read_alphabet(doc, "source_alphabet");
  Alphabet recon = read_alphabet(doc, "recon_alphabet");
  StochasticTable kernel = read_rows(
      doc, source, order + 1, recon,
      [&](const std::string& key) { return recon.index_of(key); }, recon.size());
  check_loaded(kernel, source, path);
  return TestChannelModel(order, source, recon, std::move(kernel));
}

JointMarkovModel load_joint(const std::filesystem::path& path) {
  ordered_json doc = read_document(path);
  int order = read_int(doc, "order");
  Alphabet source = read_alphabet(doc, "source_alphabet");
  Alphabet recon = read_alphabet(doc, "recon_alphabet");
  const int nr = recon.size();
  StochasticTable kernel = read_rows(
      doc, source, order, recon,
      [&](const std::string& key) {
        auto [xs, rs] = split_pair_key(key);
        return source.index_of(xs) * nr + recon.index_of(rs);
      },
      source.size() * nr);
  check_loaded(kernel, source, path);
  return JointMarkovModel::from_kernel(order, source, recon, std::move(kernel));
}

ChannelModel load_channel(const std::filesystem::path& path) {
  ordered_json doc = read_document(path);
  int mem_x = read_int(doc, "mem_x");
  int mem_y = read_int(doc, "mem_y");
  Alphabet input = read_alphabet(doc, "input_alphabet");
  Alphabet output = read_alphabet(doc, "output_alphabet");
  auto ctx_reader = [&](const ordered_json& arr) {
    Context ctx;
    int pos = 0;
    for (const auto& s : arr) {
      const Alphabet& a = pos <= mem_x ? input : output;
      ctx.push_back(a.index_of(field_string(s)));
      ++pos;
    }
    return ctx;
  };
  StochasticTable kernel = read_rows(
      doc, input, mem_x + 1 + mem_y, output,
      [&](const std::string& key) { return output.index_of(key); }, output.size(),
      ctx_reader);
  check_loaded(kernel, input, path);
  return ChannelModel(mem_x, mem_y, input, output, std::move(kernel));
}

InputPolicy load_policy(const std::filesystem::path& path) {
  ordered_json doc = read_document(path);
  int delay = read_int(doc, "delay");
  int win_x = read_int(doc, "win_x");
  int win_y = read_int(doc, "win_y");
  Alphabet input = read_alphabet(doc, "input_alphabet");
  Alphabet output = read_alphabet(doc, "output_alphabet");
  auto ctx_reader = [&](const ordered_json& arr) {
    Context ctx;
    int pos = 0;
    for (const auto& s : arr) {
      const Alphabet& a = pos < win_x ? input : output;
      ctx.push_back(a.index_of(field_string(s)));
      ++pos;
    }
    return ctx;
  };
  StochasticTable kernel = read_rows(
      doc, input, win_x + win_y, input,
      [&](const std::string& key) { return input.index_of(key); }, input.size(),
      ctx_reader);
  check_loaded(kernel, input, path);
  return InputPolicy(delay, win_x, win_y, input, output, std::move(kernel));
}

AnyModel load_model(const std::filesystem::path& path) {
  std::string kind = peek_kind(path);
  if (kind == "source") return load_source(path);
  if (kind == "test_channel") return load_test_channel(path);
  if (kind == "joint") return load_joint(path);
  if (kind == "channel") return load_channel(path);
  if (kind == "input_policy") return load_policy(path);
  throw ValidationError("'" + path.string() + "': unknown kind \"" + kind + "\"");
}

void save_model(const MarkovSourceModel& model, const std::filesystem::path& path) {
  ordered_json doc;
  doc["kind"] = "source";
  doc["order"] = model.order();
  doc["source_alphabet"] = alphabet_to_json(model.alphabet());
  doc["rows"] = rows_to_json(model.kernel(), model.alphabet(),
                             [&](int i) { return model.alphabet().name(i); });
  write_document(doc, path);
}

void save_model(const TestChannelModel& model, const std::filesystem::path& path) {
  ordered_json doc;
  doc["kind"] = "test_channel";
  doc["order"] = model.order();
  doc["source_alphabet"] = alphabet_to_json(model.source_alphabet());
  doc["recon_alphabet"] = alphabet_to_json(model.recon_alphabet());
  doc["rows"] = rows_to_json(model.kernel(), model.source_alphabet(),
                             [&](int i) { return model.recon_alphabet().name(i); });
  write_document(doc, path);
}

void save_model(const JointMarkovModel& model, const std::filesystem::path& path) {
  ordered_json doc;
  doc["kind"] = "joint";
  doc["order"] = model.order();
  doc["source_alphabet"] = alphabet_to_json(model.source_alphabet());
  doc["recon_alphabet"] = alphabet_to_json(model.recon_alphabet());
  const int nr = model.recon_alphabet().size();
  doc["rows"] = rows_to_json(model.kernel(), model.source_alphabet(), [&](int i) {
    return model.source_alphabet().name(i / nr) + "," +
           model.recon_alphabet().name(i % nr);
  });
  write_document(doc, path);
}

void save_model(const ChannelModel& model, const std::filesystem::path& path) {
  ordered_json doc;
  doc["kind"] = "channel";
  doc["mem_x"] = model.mem_x();
  doc["mem_y"] = model.mem_y();
  doc["input_alphabet"] = alphabet_to_json(model.input_alphabet());
  doc["output_alphabet"] = alphabet_to_json(model.output_alphabet());
  auto ctx_writer = [&](const Context& ctx) {
    ordered_json arr = ordered_json::array();
    for (size_t i = 0; i < ctx.size(); ++i) {
      const Alphabet& a = static_cast<int>(i) <= model.mem_x()
                              ? model.input_alphabet()
                              : model.output_alphabet();
      arr.push_back(a.name(ctx[i]));
    }
    return arr;
  };
  doc["rows"] = rows_to_json(
      model.kernel(), model.input_alphabet(),
      [&](int i) { return model.output_alphabet().name(i); }, ctx_writer);
  write_document(doc, path);
}

void save_model(const InputPolicy& model, const std::filesystem::path& path) {
  ordered_json doc;
  doc["kind"] = "input_policy";
  doc["delay"] = model.delay();
  doc["win_x"] = model.win_x();
  doc["win_y"] = model.win_y();
  doc["input_alphabet"] = alphabet_to_json(model.input_alphabet());
  doc["output_alphabet"] = alphabet_to_json(model.output_alphabet());
  auto ctx_writer = [&](const Context& ctx) {
    ordered_json arr = ordered_json::array();
    for (size_t i = 0; i < ctx.size(); ++i) {
      const Alphabet& a = static_cast<int>(i) < model.win_x()
                              ? model.input_alphabet()
                              : model.output_alphabet();
      arr.push_back(a.name(ctx[i]));
    }
    return arr;
  };
  doc["rows"] = rows_to_json(
      model.kernel(), model.input_alphabet(),
      [&](int i) { return model.input_alphabet().name(i); }, ctx_writer);
  write_document(doc, path);
}

AnyMeasure load_measure(const std::filesystem::path& path) {
  ordered_json doc = read_document(path);
  std::string kind = doc.value("kind", "");
  if (kind == "distortion") {
    DistortionTable table;
    table.order = read_int(doc, "order");
    table.delay = read_int(doc, "delay");
    table.source = read_alphabet(doc, "source_alphabet");
    table.recon = read_alphabet(doc, "recon_alphabet");
    for (const auto& cell : doc.at("cells")) {
      Context x = read_context(cell.at("x"), table.source, "cell");
      Context xhat = read_context(cell.at("xhat"), table.recon, "cell");
      table.values[{x, xhat}] = parse_decimal(cell.at("value"), "cell value");
    }
    return table;
  }
  if (kind == "cost") {
    CostTable table;
    table.delay = read_int(doc, "delay");
    table.y_window = read_int(doc, "y_window");
    table.input = read_alphabet(doc, "input_alphabet");
    table.output = read_alphabet(doc, "output_alphabet");
    for (const auto& cell : doc.at("cells")) {
      Context x = read_context(cell.at("x"), table.input, "cell");
      Context y = read_context(cell.at("y"), table.output, "cell");
      table.values[{x, y}] = parse_decimal(cell.at("value"), "cell value");
    }
    return table;
  }
  throw ValidationError("'" + path.string() +
                        "': measure kind must be \"distortion\" or \"cost\"");
}

namespace {

ordered_json cells_to_json(const std::map<Cell, double>& values,
                           const Alphabet& first, const Alphabet& second,
                           const char* second_name) {
  ordered_json cells = ordered_json::array();
  for (const auto& [cell, value] : values) {
    ordered_json c;
    ordered_json x = ordered_json::array();
    for (int s : cell.first) x.push_back(first.name(s));
    c["x"] = std::move(x);
    ordered_json b = ordered_json::array();
    for (int s : cell.second) b.push_back(second.name(s));
    c[second_name] = std::move(b);
    c["value"] = decimal_string(value);
    cells.push_back(std::move(c));
  }
  return cells;
}

}  // namespace

void save_measure(const DistortionTable& table, const std::filesystem::path& path) {
  ordered_json doc;
  doc["kind"] = "distortion";
  doc["order"] = table.order;
  doc["delay"] = table.delay;
  doc["source_alphabet"] = alphabet_to_json(table.source);
  doc["recon_alphabet"] = alphabet_to_json(table.recon);
  doc["cells"] = cells_to_json(table.values, table.source, table.recon, "xhat");
  write_document(doc, path);
}

void save_measure(const CostTable& table, const std::filesystem::path& path) {
  ordered_json doc;
  doc["kind"] = "cost";
  doc["delay"] = table.delay;
  doc["y_window"] = table.y_window;
  doc["input_alphabet"] = alphabet_to_json(table.input);
  doc["output_alphabet"] = alphabet_to_json(table.output);
  doc["cells"] = cells_to_json(table.values, table.input, table.output, "y");
  write_document(doc, path);
}

std::string certificate_to_json(const OptimalityCertificate& cert,
                                const Alphabet& cell_alphabet) {
  ordered_json doc;
  doc["status"] = status_name(cert.status);
  doc["c"] = round9(cert.c);
  doc["residual"] = round9(cert.residual);
  ordered_json d0 = ordered_json::object();
  for (const auto& [ctx, value] : cert.d0)
    d0[StochasticTable::context_name(ctx, cell_alphabet)] = round9(value);
  doc["d0"] = std::move(d0);
  if (!cert.note.empty()) doc["note"] = cert.note;
  return doc.dump(2) + "\n";
}

}  // namespace dirate
