#include "nesyvit/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "nesyvit/asp_runtime.hpp"
#include "nesyvit/concept_core.hpp"
#include "nesyvit/error.hpp"
#include "nesyvit/fold_sem.hpp"
#include "nesyvit/io.hpp"
#include "nesyvit/labeller.hpp"
#include "nesyvit/pipeline.hpp"
#include "nesyvit/rules.hpp"
#include "nesyvit/synthdata.hpp"
#include "nesyvit/trainer.hpp"

#ifndef NESYVIT_VERSION
#define NESYVIT_VERSION "0.0.0"
#endif

namespace nesyvit::cli {

namespace fs = std::filesystem;

const char* version() { return NESYVIT_VERSION; }

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  if (args.size() < 2) return args;
  std::vector<std::string> injected;
  std::vector<std::string> rest;
  for (std::size_t i = 2; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file argument");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
      continue;
    }
    const std::string text = detail::read_file(path);
    std::size_t number = 0;
    for (auto raw : detail::split(text, '\n')) {
      ++number;
      auto line = detail::trim(raw);
      if (line.empty() || line.front() == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw FormatError(path + ": expected key=value", number);
      auto key = detail::trim(line.substr(0, eq));
      auto value = detail::trim(line.substr(eq + 1));
      if (key.empty()) throw FormatError(path + ": empty key", number);
      if (key == "config") throw FormatError(path + ": nested config files are not supported", number);
      injected.push_back("--" + std::string(key) + "=" + std::string(value));
    }
  }
  std::vector<std::string> out{args[0], args[1]};
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

namespace {

std::vector<std::string> header(const std::string& subcommand, std::uint64_t seed) {
  return {"nesyvit " + std::string(version()) + " " + subcommand + " seed=" + std::to_string(seed)};
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    detail::write_file(path, text);
  }
}

std::vector<std::uint8_t> parse_bits(const std::string& text) {
  std::vector<std::uint8_t> bits;
  for (auto field : detail::split(text, ',')) {
    auto f = detail::trim(field);
    if (f == "0") {
      bits.push_back(0);
    } else if (f == "1") {
      bits.push_back(1);
    } else {
      throw UsageError("--bits expects comma-separated 0/1 values, found '" + std::string(f) + "'");
    }
  }
  return bits;
}

SynthConfig parse_synth(const std::string& text, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.seed = seed;
  for (auto field : detail::split(text, ',')) {
    auto f = detail::trim(field);
    const auto eq = f.find('=');
    if (eq == std::string_view::npos) throw UsageError("--synth expects key=value pairs, found '" + std::string(f) + "'");
    const std::string key(detail::trim(f.substr(0, eq)));
    const auto value = detail::trim(f.substr(eq + 1));
    try {
      if (key == "k" || key == "classes") {
        cfg.classes = static_cast<std::size_t>(detail::parse_integer(value, 0));
      } else if (key == "e" || key == "dim") {
        cfg.dim = static_cast<std::size_t>(detail::parse_integer(value, 0));
      } else if (key == "n" || key == "per_class") {
        cfg.per_class = static_cast<std::size_t>(detail::parse_integer(value, 0));
      } else if (key == "sep" || key == "separation") {
        cfg.separation = detail::parse_real(value, 0);
      } else if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(detail::parse_integer(value, 0));
      } else {
        throw UsageError("unknown --synth key '" + key + "'");
      }
    } catch (const FormatError& e) {
      throw UsageError("--synth " + key + ": " + e.what());
    }
  }
  return cfg;
}

void add_train_options(CLI::App* sub, TrainConfig& tc) {
  sub->add_option("--concepts", tc.concepts, "Concept neurons D")->capture_default_str();
  sub->add_option("--lr", tc.learning_rate, "Learning rate")->capture_default_str();
  sub->add_option("--weight-decay", tc.weight_decay, "Decoupled weight decay")->capture_default_str();
  sub->add_option("--batch-size", tc.batch_size)->capture_default_str();
  sub->add_option("--epochs", tc.epochs)->capture_default_str();
  sub->add_option("--patience", tc.plateau_patience, "Plateau patience in epochs")->capture_default_str();
  sub->add_option("--decay", tc.lr_decay_factor, "Learning-rate decay factor")->capture_default_str();
  sub->add_option("--schedule", tc.schedule, "plateau or cosine")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, LrSchedule>{{"plateau", LrSchedule::plateau}, {"cosine", LrSchedule::cosine}}));
  sub->add_option("--alpha", tc.loss.alpha, "Contrastive weight")->capture_default_str();
  sub->add_option("--beta", tc.loss.beta, "Entropy weight")->capture_default_str();
  sub->add_option("--gamma", tc.loss.gamma, "Sparsity weight")->capture_default_str();
  sub->add_option("--tau", tc.loss.tau, "Contrastive temperature")->capture_default_str();
  sub->add_option("--epsilon", tc.loss.epsilon)->capture_default_str();
}

void add_fold_options(CLI::App* sub, FoldParams& fp) {
  sub->add_option("--ratio", fp.ratio, "Max FP/TP of a default part")->capture_default_str();
  sub->add_option("--tail", fp.tail, "Min coverage (fraction if <= 1)")->capture_default_str();
  sub->add_option("--max-depth", fp.max_exception_depth, "Exception nesting limit")->capture_default_str();
}

struct Options {
  std::uint64_t seed = 0;

  // synth
  SynthConfig synth;
  std::string heatmap_dir, mask_dir;
  FixtureConfig fixture;

  // shared paths
  std::string data, layer, table, rules, out, history, report, names, names_out, out_dir;

  TrainConfig train;
  FoldParams fold;
  LabelParams label;
  double threshold = 0.5;
  double test_fraction = 0.2;

  // classify
  std::string bits;
  std::optional<std::size_t> row;
  bool justify_flag = false;

  std::string synth_spec;
};

int cmd_synth(const Options& o, std::ostream& out) {
  SynthConfig cfg = o.synth;
  cfg.seed = o.seed;
  const auto data = generate(cfg);
  std::ostringstream text;
  write_embeddings(text, data, header("synth", o.seed));
  emit(o.out, text.str(), out);
  if (o.heatmap_dir.empty() != o.mask_dir.empty()) {
    throw UsageError("--heatmaps and --masks must be given together");
  }
  if (!o.heatmap_dir.empty()) {
    const auto fixtures = generate_label_fixtures(cfg, o.fixture);
    save_label_data(fixtures.data, o.heatmap_dir, o.mask_dir);
  }
  return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out) {
  TrainConfig tc = o.train;
  tc.seed = o.seed;
  const auto data = load_embeddings(o.data);
  const auto result = train(data, tc);
  std::ostringstream text;
  write_layer(text, result.layer, header("train", o.seed));
  emit(o.out, text.str(), out);
  if (!o.history.empty()) {
    std::ostringstream h;
    for (const auto& c : header("train", o.seed)) h << "# " << c << '\n';
    write_history(h, result.history);
    detail::write_file(o.history, h.str());
  }
  return kExitOk;
}

int cmd_binarize(const Options& o, std::ostream& out) {
  const auto data = load_embeddings(o.data);
  const auto layer = load_layer(o.layer);
  const auto table = binarize(forward(layer, data), data.class_names, o.threshold);
  std::ostringstream text;
  write_table(text, table, header("binarize", o.seed));
  emit(o.out, text.str(), out);
  return kExitOk;
}

int cmd_rules(const Options& o, std::ostream& out) {
  const auto table = load_table(o.table);
  const auto rs = learn(table, o.fold);
  emit(o.out, serialize(rs, header("rules", o.seed)), out);
  return kExitOk;
}

RuleSet load_rules(const std::string& path) { return parse_rules(detail::read_file(path)); }

int cmd_classify(const Options& o, std::ostream& out) {
  const auto rs = load_rules(o.rules);
  std::vector<std::uint8_t> bits;
  if (!o.bits.empty() && o.row) throw UsageError("give either --bits or --table with --row");
  if (!o.bits.empty()) {
    bits = parse_bits(o.bits);
  } else if (o.row && !o.table.empty()) {
    const auto table = load_table(o.table);
    if (*o.row >= table.rows) {
      throw UsageError("--row " + std::to_string(*o.row) + " is outside the table (" +
                       std::to_string(table.rows) + " rows)");
    }
    auto r = table.row(*o.row);
    bits.assign(r.begin(), r.end());
  } else {
    throw UsageError("classify needs --bits, or --table with --row");
  }
  if (o.justify_flag) {
    out << render(justify(rs, bits), rs);
    return kExitOk;
  }
  const auto p = classify(rs, bits);
  if (p.cls) {
    out << "prediction: " << rs.class_names[*p.cls] << " (rule " << *p.fired_rule + 1 << ")\n";
  } else {
    out << "prediction: none (no rule fires)\n";
  }
  return kExitOk;
}

int cmd_label(const Options& o, std::ostream& out) {
  const auto rs = load_rules(o.rules);
  std::map<std::size_t, std::string> names;
  if (!o.names.empty()) {
    std::istringstream in(detail::read_file(o.names));
    names = read_name_map(in);
  } else {
    if (o.data.empty() || o.layer.empty() || o.heatmap_dir.empty() || o.mask_dir.empty()) {
      throw UsageError("label needs --names, or --data, --layer, --heatmaps and --masks");
    }
    const auto data = load_embeddings(o.data);
    const auto layer = load_layer(o.layer);
    const auto acts = forward(layer, data);
    const auto label_data = load_label_data(o.heatmap_dir, o.mask_dir);
    names = label_rules(rs, acts, label_data, o.label);
  }
  const auto renamed = rename_ruleset(rs, names);
  emit(o.out, serialize(renamed, header("label", o.seed)), out);
  if (!o.names_out.empty()) {
    std::ostringstream text;
    write_name_map(text, names, header("label", o.seed));
    detail::write_file(o.names_out, text.str());
  }
  return kExitOk;
}

void write_stats(std::ostream& out, const RuleSetStats& s) {
  out << "rules " << s.rules << '\n' << "unique_predicates " << s.unique_predicates << '\n'
      << "size " << s.size << '\n';
}

int cmd_eval(const Options& o, std::ostream& out) {
  const auto rs = load_rules(o.rules);
  const auto s = stats(rs);
  if (o.table.empty()) {
    write_stats(out, s);
    return kExitOk;
  }
  const auto table = load_table(o.table);
  const auto ev = evaluate(rs, table);
  std::ostringstream csv;
  for (const auto& c : header("eval", o.seed)) csv << "# " << c << '\n';
  write_report(csv, ev);
  if (!o.report.empty()) detail::write_file(o.report, csv.str());
  out << "accuracy " << format_real(ev.accuracy) << '\n' << "abstained " << ev.abstained << '\n';
  write_stats(out, s);
  return kExitOk;
}

int cmd_pipeline(const Options& o, std::ostream& out) {
  EmbeddingDataset data;
  if (!o.synth_spec.empty() == !o.data.empty()) throw UsageError("pipeline needs exactly one of --synth or --data");
  if (!o.synth_spec.empty()) {
    data = generate(parse_synth(o.synth_spec, o.seed));
  } else {
    data = load_embeddings(o.data);
  }
  PipelineConfig pc;
  pc.train = o.train;
  pc.train.seed = o.seed;
  pc.fold = o.fold;
  pc.threshold = o.threshold;
  pc.test_fraction = o.test_fraction;
  pc.seed = o.seed;
  const auto result = run_pipeline(data, pc);
  const auto hdr = header("pipeline", o.seed);

  std::ostringstream report;
  write_pipeline_report(report, result, hdr);
  out << report.str();

  if (!o.out_dir.empty()) {
    const fs::path dir(o.out_dir);
    fs::create_directories(dir);
    auto save = [&](const std::string& name, auto&& write) {
      std::ostringstream text;
      write(text);
      detail::write_file(dir / name, text.str());
    };
    if (!o.synth_spec.empty()) save("data.emb", [&](std::ostream& s) { write_embeddings(s, data, hdr); });
    save("layer.txt", [&](std::ostream& s) { write_layer(s, result.trained.layer, hdr); });
    save("history.csv", [&](std::ostream& s) {
      for (const auto& c : hdr) s << "# " << c << '\n';
      write_history(s, result.trained.history);
    });
    save("train.csv", [&](std::ostream& s) { write_table(s, result.train_table, hdr); });
    save("test.csv", [&](std::ostream& s) { write_table(s, result.test_table, hdr); });
    save("rules.lp", [&](std::ostream& s) { s << serialize(result.rules, hdr); });
    save("eval.csv", [&](std::ostream& s) {
      for (const auto& c : hdr) s << "# " << c << '\n';
      write_report(s, result.test_eval);
    });
    save("report.txt", [&](std::ostream& s) { s << report.str(); });
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sparse concept layer training, rule extraction and rule-set tools"};
  app.name("nesyvit");
  app.set_version_flag("--version", version());
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.get_formatter()->column_width(34);

  Options o;
  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "Seed; recorded in every output header")->capture_default_str();
    // Consumed by expand_config before parsing; declared so it shows up in --help.
    sub->add_option("--config", "key=value file; explicit flags win");
  };

  auto* synth = app.add_subcommand("synth", "Generate Gaussian-blob embeddings (and label fixtures)");
  add_seed(synth);
  synth->add_option("-k,--classes", o.synth.classes)->capture_default_str();
  synth->add_option("--dim", o.synth.dim)->capture_default_str();
  synth->add_option("--per-class", o.synth.per_class)->capture_default_str();
  synth->add_option("--separation", o.synth.separation)->capture_default_str();
  synth->add_option("-o,--out", o.out, "Embedding file (stdout if omitted)");
  synth->add_option("--heatmaps", o.heatmap_dir, "Write fixture heatmaps here");
  synth->add_option("--masks", o.mask_dir, "Write fixture masks here");
  synth->add_option("--fixture-height", o.fixture.height)->capture_default_str();
  synth->add_option("--fixture-width", o.fixture.width)->capture_default_str();

  auto* train_cmd = app.add_subcommand("train", "Train the concept layer");
  add_seed(train_cmd);
  train_cmd->add_option("--data", o.data, "Embedding file")->required();
  train_cmd->add_option("-o,--out", o.out, "Layer file")->required();
  train_cmd->add_option("--history", o.history, "Per-epoch loss CSV");
  add_train_options(train_cmd, o.train);

  auto* bin = app.add_subcommand("binarize", "Threshold concept activations into a binary table");
  add_seed(bin);
  bin->add_option("--data", o.data, "Embedding file")->required();
  bin->add_option("--layer", o.layer, "Layer file")->required();
  bin->add_option("-o,--out", o.out, "Table CSV (stdout if omitted)");
  bin->add_option("--threshold", o.threshold)->capture_default_str();

  auto* rules = app.add_subcommand("rules", "Learn a rule-set from a binary table");
  add_seed(rules);
  rules->add_option("--table", o.table, "Binary table CSV")->required();
  rules->add_option("-o,--out", o.out, "Rule-set file (stdout if omitted)");
  add_fold_options(rules, o.fold);

  auto* cls = app.add_subcommand("classify", "Classify one bit vector");
  add_seed(cls);
  cls->add_option("--rules", o.rules, "Rule-set file")->required();
  cls->add_option("--bits", o.bits, "Comma-separated bits, e.g. 1,0,0");
  cls->add_option("--table", o.table, "Binary table CSV");
  cls->add_option("--row", o.row, "0-based row of --table");
  cls->add_flag("--justify", o.justify_flag, "Print the evaluation trace");

  auto* label = app.add_subcommand("label", "Rename rule predicates with concept names");
  add_seed(label);
  label->add_option("--rules", o.rules, "Rule-set file")->required();
  label->add_option("--names", o.names, "Existing name map; skips IoU labelling");
  label->add_option("--data", o.data, "Embedding file");
  label->add_option("--layer", o.layer, "Layer file");
  label->add_option("--heatmaps", o.heatmap_dir, "Heatmap directory");
  label->add_option("--masks", o.mask_dir, "Mask directory");
  label->add_option("--top-k", o.label.top_k)->capture_default_str();
  label->add_option("--theta", o.label.theta)->capture_default_str();
  label->add_option("--margin", o.label.margin)->capture_default_str();
  label->add_option("--max-concepts", o.label.max_concepts)->capture_default_str();
  label->add_option("-o,--out", o.out, "Labelled rule-set (stdout if omitted)");
  label->add_option("--names-out", o.names_out, "Write the name map here");

  auto* eval = app.add_subcommand("eval", "Rule-set statistics and accuracy");
  add_seed(eval);
  eval->add_option("--rules", o.rules, "Rule-set file")->required();
  eval->add_option("--table", o.table, "Binary table CSV");
  eval->add_option("--report", o.report, "Per-class CSV report");

  auto* pipe = app.add_subcommand("pipeline", "synth/load, split, train, binarize, learn, evaluate");
  add_seed(pipe);
  pipe->add_option("--synth", o.synth_spec, "e.g. k=4,e=32,n=200,sep=4");
  pipe->add_option("--data", o.data, "Embedding file");
  pipe->add_option("--out-dir", o.out_dir, "Write every artifact here");
  pipe->add_option("--threshold", o.threshold)->capture_default_str();
  pipe->add_option("--test-fraction", o.test_fraction)->capture_default_str();
  add_train_options(pipe, o.train);
  add_fold_options(pipe, o.fold);

  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    try {
      app.parse(reversed);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kExitOk : kExitUsage;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "synth") return cmd_synth(o, out);
    if (name == "train") return cmd_train(o, out);
    if (name == "binarize") return cmd_binarize(o, out);
    if (name == "rules") return cmd_rules(o, out);
    if (name == "classify") return cmd_classify(o, out);
    if (name == "label") return cmd_label(o, out);
    if (name == "eval") return cmd_eval(o, out);
    return cmd_pipeline(o, out);
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace nesyvit::cli
