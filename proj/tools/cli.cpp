#include "cli.hpp"

#include <algorithm>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <vector>

#include "CLI11.hpp"
#include "http_frontend.hpp"
#include "pipestash/error.hpp"
#include "pipestash/ingestion.hpp"
#include "pipestash/recommender.hpp"
#include "pipestash/replay.hpp"
#include "pipestash/rule_index.hpp"
#include "pipestash/service.hpp"

namespace pipestash::cli {

namespace {

struct CliConfig {
  std::string history_path;
  std::string history_format;  // "", "lines" or "dsl"
  std::string store_dir;
  std::string manifest_path;
  bool include_full_pipeline = false;
  std::size_t top_k = 10;
  std::string output_path;
  std::string output_format;  // "", "json", "csv" or "table"
  std::string dataset;
  std::string prefix;
  std::string pipeline;
  std::string policy = "risp";
  std::string addr = "127.0.0.1:8080";
  std::string ui_dir;

  std::optional<HistoryFormat> format() const {
    if (history_format == "dsl") return HistoryFormat::kDsl;
    if (history_format == "lines") return HistoryFormat::kLines;
    return std::nullopt;
  }
  MiningOptions options() const { return MiningOptions{include_full_pipeline}; }
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(item);
  return out;
}

void emit(const CliConfig& config, const std::string& text, CliIo& io) {
  if (config.output_path.empty()) {
    io.out << text;
    io.out.flush();
    return;
  }
  std::ofstream out(config.output_path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + config.output_path);
}

std::string resolve_output(const CliConfig& config, const CliIo& io) {
  if (!config.output_format.empty()) return config.output_format;
  return io.out_is_tty && config.output_path.empty() ? "table" : "json";
}

// `serve` may start from a history file that does not exist yet.
ServiceConfig service_config(const CliConfig& config, bool require_history = true) {
  ServiceConfig sc;
  if (!config.history_path.empty()) {
    sc.history_path = config.history_path;
    if (require_history && !std::filesystem::exists(*sc.history_path)) {
      throw Error(ErrorCode::kIoFailure, "no history file " + config.history_path);
    }
  }
  sc.history_format = config.format();
  if (!config.store_dir.empty()) sc.store_dir = config.store_dir;
  if (!config.manifest_path.empty()) sc.manifest_path = config.manifest_path;
  sc.options = config.options();
  sc.policy = parse_policy(config.policy).value_or(Policy::kRisp);
  sc.default_top_k = config.top_k;
  return sc;
}

std::string suggestions_table(const std::vector<ReuseSuggestion>& suggestions) {
  std::ostringstream out;
  if (suggestions.empty()) {
    out << "(no suggestions)\n";
    return out.str();
  }
  out << std::left << std::setw(5) << "rank" << std::setw(28) << "consequent"
      << std::setw(9) << "support" << std::setw(12) << "confidence"
      << "stored\n";
  for (std::size_t i = 0; i < suggestions.size(); ++i) {
    const ReuseSuggestion& s = suggestions[i];
    out << std::left << std::setw(5) << i + 1 << std::setw(28)
        << ("(" + join(s.rule.consequent, ", ") + ")") << std::setw(9)
        << s.stats.support << std::setw(12) << to_string(s.stats.confidence())
        << (s.stored ? "yes " + *s.store_key : "no") << "\n";
  }
  return out.str();
}

std::string suggestions_csv(const std::vector<ReuseSuggestion>& suggestions) {
  std::ostringstream out;
  out << "rank,consequent,support,confidence,stored,storeKey\n";
  for (std::size_t i = 0; i < suggestions.size(); ++i) {
    const ReuseSuggestion& s = suggestions[i];
    out << i + 1 << ',' << join(s.rule.consequent) << ',' << s.stats.support
        << ',' << to_string(s.stats.confidence()) << ','
        << (s.stored ? "true" : "false") << ',' << s.store_key.value_or("")
        << '\n';
  }
  return out.str();
}

std::string decision_table(const StoreDecision& decision) {
  std::ostringstream out;
  out << "mode: " << to_string(decision.mode) << "\n";
  if (decision.store_points.empty()) out << "(no store points)\n";
  for (const SubPipeline& p : decision.store_points) {
    out << "  store " << p.dataset.str() << " => (" << join(p.prefix, ", ")
        << ")\n";
  }
  return out.str();
}

std::string decision_csv(const StoreDecision& decision) {
  std::ostringstream out;
  out << "mode,dataset,prefix\n";
  for (const SubPipeline& p : decision.store_points) {
    out << to_string(decision.mode) << ',' << p.dataset.str() << ','
        << join(p.prefix) << '\n';
  }
  return out.str();
}

int cmd_mine(const CliConfig& config, CliIo& io) {
  const History history = load_history(config.history_path, config.format());
  const RuleIndex index = build_index(history, config.options());
  std::optional<DatasetId> dataset;
  if (!config.dataset.empty()) dataset.emplace(config.dataset);
  emit(config, export_rules(index, dataset), io);
  return kOk;
}

int cmd_reuse(const CliConfig& config, CliIo& io) {
  ApiService service(service_config(config));
  const DatasetId dataset(config.dataset);
  const ModuleSeq prefix = to_modules(split_list(config.prefix));
  const auto suggestions = service.suggest(dataset, prefix, config.top_k);
  const std::string format = resolve_output(config, io);
  if (format == "table") {
    emit(config, suggestions_table(suggestions), io);
  } else if (format == "csv") {
    emit(config, suggestions_csv(suggestions), io);
  } else {
    emit(config, suggestions_json(suggestions), io);
  }
  return kOk;
}

int cmd_store(const CliConfig& config, CliIo& io) {
  ApiService service(service_config(config));
  const DatasetId dataset(config.dataset);
  const ModuleSeq modules = to_modules(split_list(config.pipeline));
  if (modules.empty()) throw Error(ErrorCode::kEmptyModules, "--pipeline is empty");
  const StoreDecision decision = service.preview_store(dataset, modules);
  const std::string format = resolve_output(config, io);
  if (format == "table") {
    emit(config, decision_table(decision), io);
  } else if (format == "csv") {
    emit(config, decision_csv(decision), io);
  } else {
    emit(config, store_decision_json(decision), io);
  }
  return kOk;
}

int cmd_replay(const CliConfig& config, CliIo& io) {
  const History history = load_history(config.history_path, config.format());
  const Policy policy = parse_policy(config.policy).value_or(Policy::kRisp);
  const ReplayReport report = replay(history, policy, config.options());
  emit(config,
       config.output_format == "csv" ? report_to_csv(report)
                                     : report_to_json(report),
       io);
  return kOk;
}

int cmd_session(const CliConfig& config, CliIo& io) {
  ApiService service(service_config(config));
  const DatasetId dataset(config.dataset);
  ModuleSeq prefix;
  std::vector<ReuseSuggestion> current;

  auto show = [&] {
    current = service.suggest(dataset, prefix, config.top_k);
    io.out << "pipeline " << dataset.str() << ": "
           << (prefix.empty() ? "(empty)" : join(prefix)) << "\n"
           << suggestions_table(current);
    io.out.flush();
  };

  io.out << "module token to append, 'use N' to skip to suggestion N, "
            "'done' to finish, 'reset', 'quit'\n";
  show();
  std::string line;
  while (std::getline(io.in, line)) {
    std::istringstream words(line);
    std::string word;
    if (!(words >> word)) continue;
    if (word == "quit" || word == "exit") break;
    if (word == "reset") {
      prefix.clear();
      show();
    } else if (word == "done") {
      if (prefix.empty()) {
        io.err << "pipeline is empty\n";
        continue;
      }
      io.out << decision_table(service.preview_store(dataset, prefix));
      prefix.clear();
      show();
    } else if (word == "use") {
      std::size_t n = 0;
      if (!(words >> n) || n == 0 || n > current.size()) {
        io.err << "no suggestion with that number\n";
        continue;
      }
      prefix = current[n - 1].rule.consequent;
      show();
    } else if (is_valid_token(word)) {
      prefix.emplace_back(word);
      show();
    } else {
      io.err << "invalid module token '" << word << "'\n";
    }
  }
  return kOk;
}

HttpFrontend* g_frontend = nullptr;

extern "C" void on_signal(int) {
  if (g_frontend) g_frontend->stop();
}

int cmd_serve(const CliConfig& config, CliIo& io) {
  const auto colon = config.addr.rfind(':');
  if (colon == std::string::npos) {
    io.err << "--addr must be host:port\n";
    return kUsage;
  }
  const std::string host = config.addr.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(config.addr.substr(colon + 1));
  } catch (const std::exception&) {
    io.err << "bad port in --addr\n";
    return kUsage;
  }
  ApiService service(service_config(config, false));
  std::optional<std::filesystem::path> ui;
  if (!config.ui_dir.empty()) ui = config.ui_dir;
  HttpFrontend frontend(service, ui);
  const int bound = frontend.bind(host, port);
  if (bound < 0) {
    throw Error(ErrorCode::kIoFailure, "cannot bind " + config.addr);
  }
  io.err << "listening on " << host << ":" << bound << "\n";
  g_frontend = &frontend;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  frontend.listen();
  g_frontend = nullptr;
  return kOk;
}

void add_history(CLI::App* cmd, CliConfig& config, bool format_flag_is_history) {
  cmd->add_option("--history", config.history_path, "Usage history file")
      ->required();
  const auto formats = CLI::IsMember({"lines", "dsl"});
  if (format_flag_is_history) {
    cmd->add_option("--format,--history-format", config.history_format,
                    "History format (default: from extension)")
        ->check(formats);
  } else {
    cmd->add_option("--history-format", config.history_format,
                    "History format (default: from extension)")
        ->check(formats);
  }
  cmd->add_flag("--include-full", config.include_full_pipeline,
                "Count complete pipelines as itemsets");
}

}  // namespace

int run_cli(std::span<const std::string> args, CliIo io) {
  CliConfig config;
  CLI::App app{"Association-rule recommendations for storing and reusing "
               "pipeline intermediates",
               "pipestash"};
  app.require_subcommand(1);

  auto* mine = app.add_subcommand("mine", "Mine rules and print the rule export");
  add_history(mine, config, true);
  mine->add_option("--out", config.output_path, "Write to file instead of stdout");
  mine->add_option("--dataset", config.dataset, "Only this dataset");

  auto* recommend = app.add_subcommand("recommend", "Reuse or store recommendations");
  recommend->require_subcommand(1);
  const auto outputs = CLI::IsMember({"json", "csv", "table"});

  auto* reuse = recommend->add_subcommand("reuse", "Stored intermediates to start from");
  add_history(reuse, config, false);
  reuse->add_option("--dataset", config.dataset, "Dataset of the pipeline")->required();
  reuse->add_option("--prefix", config.prefix, "Modules so far, comma separated");
  reuse->add_option("--manifest", config.manifest_path, "Manifest to flag stored entries");
  reuse->add_option("--top", config.top_k, "Maximum suggestions")
      ->check(CLI::PositiveNumber);
  reuse->add_option("--output", config.output_format, "json, csv or table")
      ->check(outputs);
  reuse->add_option("--out", config.output_path, "Write to file instead of stdout");

  auto* store = recommend->add_subcommand("store", "Where to store a completed pipeline");
  add_history(store, config, false);
  store->add_option("--dataset", config.dataset, "Dataset of the pipeline")->required();
  store->add_option("--pipeline", config.pipeline, "Modules, comma separated")
      ->required();
  store->add_option("--output", config.output_format, "json, csv or table")
      ->check(outputs);
  store->add_option("--out", config.output_path, "Write to file instead of stdout");

  auto* rp = app.add_subcommand("replay", "Replay history and score a storing policy");
  add_history(rp, config, false);
  rp->add_option("--policy", config.policy, "risp, store-all or store-none")
      ->check(CLI::IsMember({"risp", "store-all", "store-none"}));
  rp->add_option("--format", config.output_format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  rp->add_option("--out", config.output_path, "Write to file instead of stdout");

  auto* session = app.add_subcommand("session", "Interactive pipeline builder");
  add_history(session, config, false);
  session->add_option("--dataset", config.dataset, "Dataset of the pipeline")->required();
  session->add_option("--manifest", config.manifest_path, "Manifest to flag stored entries");
  session->add_option("--top", config.top_k, "Maximum suggestions")
      ->check(CLI::PositiveNumber);

  auto* serve = app.add_subcommand("serve", "Run the JSON HTTP service");
  add_history(serve, config, false);
  serve->add_option("--addr", config.addr, "host:port to listen on");
  serve->add_option("--store-dir", config.store_dir, "Manifest and blob directory")
      ->required();
  serve->add_option("--ui-dir", config.ui_dir, "Static files served at /");
  serve->add_option("--policy", config.policy, "risp, store-all or store-none")
      ->check(CLI::IsMember({"risp", "store-all", "store-none"}));

  std::vector<const char*> argv;
  argv.push_back("pipestash");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, io.out, io.err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, io.out, io.err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, io.out, io.err);
    return kUsage;
  }

  try {
    if (mine->parsed()) return cmd_mine(config, io);
    if (reuse->parsed()) return cmd_reuse(config, io);
    if (store->parsed()) return cmd_store(config, io);
    if (rp->parsed()) return cmd_replay(config, io);
    if (session->parsed()) return cmd_session(config, io);
    if (serve->parsed()) return cmd_serve(config, io);
  } catch (const Error& e) {
    io.err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace pipestash::cli
