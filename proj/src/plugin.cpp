#include "edr/plugin.hpp"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <map>
#include <thread>

#include "edr/error.hpp"
#include "edr/io.hpp"
#include "edr/json.hpp"

extern char** environ;

namespace edr::plugin {

namespace fs = std::filesystem;

std::string to_string(Kind kind) { return kind == Kind::Restorer ? "restorer" : "detector"; }

void PluginSpec::validate() const {
  std::error_code ec;
  if (executable.empty() || !fs::is_regular_file(executable, ec)) {
    throw PluginError("plug-in executable not found: " + executable.string());
  }
  const auto perms = fs::status(executable, ec).permissions();
  const auto any_exec = fs::perms::owner_exec | fs::perms::group_exec | fs::perms::others_exec;
  if ((perms & any_exec) == fs::perms::none || ::access(executable.c_str(), X_OK) != 0) {
    throw PluginError("plug-in is not executable: " + executable.string());
  }
  if (!(timeout_seconds > 0)) throw PluginError("plug-in timeout must be positive");
}

std::string patch_file_name(const PatchGrid& grid, std::size_t id) { return "patch_" + grid.patch_id(id) + ".png"; }

std::string batch_manifest(const PatchBatch& batch, Kind kind) {
  const PatchGrid& g = *batch.grid;
  json origins = json::array();
  for (const auto& o : g.origins) origins.push_back({o.row, o.col});
  json patches = json::array();
  for (std::size_t id : batch.ids) {
    patches.push_back({{"id", g.patch_id(id)},
                       {"file", patch_file_name(g, id)},
                       {"row", g.grid_row(id)},
                       {"col", g.grid_col(id)},
                       {"origin", {g.origins[id].row, g.origins[id].col}}});
  }
  json j{{"kind", to_string(kind)},
         {"source_width", g.source_width},
         {"source_height", g.source_height},
         {"w", g.patch_size},
         {"p", g.overlap},
         {"scale", batch.scale},
         {"grid_rows", g.grid_rows},
         {"grid_cols", g.grid_cols},
         {"origins", origins},
         {"patches", patches}};
  return j.dump(2) + "\n";
}

std::vector<Detection> parse_detections(const std::string& text, const PatchBatch& batch) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ProtocolError("detections.json is not valid JSON", e.what());
  }
  if (!j.is_array()) throw ProtocolError("detections.json must hold a JSON list");

  const PatchGrid& g = *batch.grid;
  std::map<std::string, std::size_t> known;
  for (std::size_t id : batch.ids) known.emplace(g.patch_id(id), id);
  const int limit = g.patch_size * batch.scale;

  std::vector<Detection> out;
  out.reserve(j.size());
  for (std::size_t k = 0; k < j.size(); ++k) {
    const json& e = j[k];
    const std::string where = "detection #" + std::to_string(k);
    auto need_int = [&](const char* key) {
      if (!e.contains(key) || !e[key].is_number_integer()) throw ProtocolError(where + ": field '" + key + "' must be an integer");
      return e[key].get<int>();
    };
    if (!e.is_object()) throw ProtocolError(where + " is not an object");
    if (!e.contains("patch") || !e["patch"].is_string()) throw ProtocolError(where + ": field 'patch' must be a string");
    if (!e.contains("class") || !e["class"].is_string()) throw ProtocolError(where + ": field 'class' must be a string");
    if (!e.contains("score") || !e["score"].is_number()) throw ProtocolError(where + ": field 'score' must be a number");
    Detection d;
    d.patch = e["patch"].get<std::string>();
    if (!known.contains(d.patch)) throw ProtocolError(where + ": unknown patch '" + d.patch + "'");
    d.class_label = e["class"].get<std::string>();
    d.box = {need_int("x"), need_int("y"), need_int("w"), need_int("h")};
    d.score = e["score"].get<double>();
    d.frame = Frame::PatchLocal;
    if (d.box.w < 1 || d.box.h < 1 || d.box.x < 0 || d.box.y < 0 || d.box.x + d.box.w > limit ||
        d.box.y + d.box.h > limit) {
      throw ProtocolError(where + ": box lies outside its " + std::to_string(limit) + "x" + std::to_string(limit) +
                          " patch");
    }
    if (!(d.score >= 0.0 && d.score <= 1.0)) throw ProtocolError(where + ": score must lie in [0, 1]");
    out.push_back(std::move(d));
  }
  return out;
}

namespace {

class WorkDir {
 public:
  explicit WorkDir(bool keep) : keep_(keep) {
    std::string templ = (fs::temp_directory_path() / "edr-plugin-XXXXXX").string();
    if (::mkdtemp(templ.data()) == nullptr) throw IoError("cannot create plug-in working directory");
    path_ = templ;
    fs::create_directory(path_ / "in");
    fs::create_directory(path_ / "out");
  }
  ~WorkDir() {
    if (keep_) return;
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  WorkDir(const WorkDir&) = delete;
  WorkDir& operator=(const WorkDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path in() const { return path_ / "in"; }
  fs::path out() const { return path_ / "out"; }

 private:
  fs::path path_;
  bool keep_;
};

std::string read_if_exists(const fs::path& p) {
  std::error_code ec;
  return fs::exists(p, ec) ? io::read_text(p) : std::string{};
}

ProcessResult run_plugin(const PluginSpec& spec, const PatchBatch& batch, const WorkDir& dir) {
  spec.validate();
  io::write_text(dir.in() / "manifest.json", batch_manifest(batch, spec.kind));
  for (std::size_t id : batch.ids) io::write_png(dir.in() / patch_file_name(*batch.grid, id), batch.grid->patches[id]);

  std::vector<std::string> argv{spec.executable.string(), "--input-dir", dir.in().string(), "--output-dir",
                                dir.out().string(),        "--scale",     std::to_string(batch.scale),
                                "--kind",                  to_string(spec.kind)};
  argv.insert(argv.end(), spec.extra_args.begin(), spec.extra_args.end());
  ProcessResult res = run_process(argv, spec.timeout_seconds, dir.path());
  if (res.timed_out) {
    throw PluginError(spec.executable.filename().string() + " timed out after " +
                          std::to_string(spec.timeout_seconds) + " s",
                      res.stderr_text);
  }
  if (res.exit_code != 0) {
    throw PluginError(spec.executable.filename().string() + " exited with status " + std::to_string(res.exit_code),
                      res.stderr_text);
  }
  return res;
}

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv, double timeout_seconds, const fs::path& log_dir) {
  if (argv.empty()) throw PluginError("empty command line");
  const fs::path out_log = log_dir / "stdout.log";
  const fs::path err_log = log_dir / "stderr.log";

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null", O_RDONLY, 0);
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, out_log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_addopen(&actions, STDERR_FILENO, err_log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);

  std::vector<char*> cargv;
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);

  pid_t pid = 0;
  const int rc = posix_spawn(&pid, cargv[0], &actions, nullptr, cargv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) throw PluginError("cannot launch " + argv[0], std::strerror(rc));

  ProcessResult res;
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_seconds);
  int status = 0;
  for (;;) {
    const pid_t done = ::waitpid(pid, &status, WNOHANG);
    if (done == pid) break;
    if (done < 0 && errno != EINTR) throw PluginError("waitpid failed for " + argv[0], std::strerror(errno));
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      res.timed_out = true;
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
  if (!res.timed_out) {
    if (WIFEXITED(status)) res.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status)) res.exit_code = 128 + WTERMSIG(status);
  }
  res.stdout_text = read_if_exists(out_log);
  res.stderr_text = read_if_exists(err_log);
  return res;
}

std::vector<GrayImage> invoke_restorer(const PluginSpec& spec, const PatchBatch& batch) {
  if (spec.kind != Kind::Restorer) throw PluginError("plug-in " + spec.executable.string() + " is not a restorer");
  if (batch.ids.empty()) return {};
  WorkDir dir(spec.keep_workdir);
  run_plugin(spec, batch, dir);
  const int expected = batch.grid->patch_size * batch.scale;
  std::vector<GrayImage> out;
  out.reserve(batch.ids.size());
  for (std::size_t id : batch.ids) {
    const fs::path p = dir.out() / patch_file_name(*batch.grid, id);
    std::error_code ec;
    if (!fs::exists(p, ec)) throw ProtocolError("restorer produced no " + p.filename().string());
    GrayImage img;
    try {
      img = io::read_gray(p);
    } catch (const IoError& e) {
      throw ProtocolError("restorer output unreadable", e.what());
    }
    if (img.width() != expected || img.height() != expected) {
      throw ProtocolError("restorer output " + p.filename().string() + " is " + std::to_string(img.width()) + "x" +
                          std::to_string(img.height()) + ", expected " + std::to_string(expected) + "x" +
                          std::to_string(expected));
    }
    out.push_back(std::move(img));
  }
  return out;
}

std::vector<Detection> invoke_detector(const PluginSpec& spec, const PatchBatch& batch) {
  if (spec.kind != Kind::Detector) throw PluginError("plug-in " + spec.executable.string() + " is not a detector");
  if (batch.ids.empty()) return {};
  WorkDir dir(spec.keep_workdir);
  run_plugin(spec, batch, dir);
  const fs::path p = dir.out() / "detections.json";
  std::error_code ec;
  if (!fs::exists(p, ec)) throw ProtocolError("detector produced no detections.json");
  return parse_detections(io::read_text(p), batch);
}

}  // namespace edr::plugin
