#include "hidsq/adapter.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>

#include <fmt/format.h>

#include "hidsq/error.hpp"

extern char** environ;

namespace hidsq {

void ExternalModelSpec::validate() const {
  if (command.empty()) throw std::invalid_argument("external model '" + name + "': empty command");
  if (!(timeout_seconds > 0.0)) throw std::invalid_argument("external model '" + name + "': timeout must be > 0");
}

namespace {

void append_values(std::string& out, const Sequence& s) {
  for (std::size_t i = 0; i < s.grams.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(s.grams[i]);
  }
  out += '\n';
}

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  ~Fd() { reset(); }
  int get() const { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

std::pair<Fd, Fd> make_pipe() {
  int p[2];
  if (::pipe2(p, O_CLOEXEC) != 0) throw Error(std::string("pipe: ") + std::strerror(errno));
  return {Fd(p[0]), Fd(p[1])};
}

constexpr std::size_t kMaxDiagnostics = 64 * 1024;

class Child {
 public:
  explicit Child(const std::string& command) {
    static const bool sigpipe_ignored = [] {
      ::signal(SIGPIPE, SIG_IGN);
      return true;
    }();
    (void)sigpipe_ignored;
    auto [in_r, in_w] = make_pipe();
    auto [out_r, out_w] = make_pipe();
    auto [err_r, err_w] = make_pipe();
    posix_spawn_file_actions_t fa;
    posix_spawn_file_actions_init(&fa);
    posix_spawn_file_actions_adddup2(&fa, in_r.get(), 0);
    posix_spawn_file_actions_adddup2(&fa, out_w.get(), 1);
    posix_spawn_file_actions_adddup2(&fa, err_w.get(), 2);
    std::string sh = "sh", dash_c = "-c", cmd = command;
    char* argv[] = {sh.data(), dash_c.data(), cmd.data(), nullptr};
    // Own process group, so a kill reaches whatever the shell started.
    posix_spawnattr_t attr;
    posix_spawnattr_init(&attr);
    posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
    posix_spawnattr_setpgroup(&attr, 0);
    const int rc = ::posix_spawn(&pid_, "/bin/sh", &fa, &attr, argv, environ);
    posix_spawnattr_destroy(&attr);
    posix_spawn_file_actions_destroy(&fa);
    if (rc != 0) throw ProtocolError(std::string("cannot start child: ") + std::strerror(rc));
    stdin_ = std::move(in_w);
    stdout_ = std::move(out_r);
    stderr_ = std::move(err_r);
    for (int fd : {stdin_.get(), stdout_.get(), stderr_.get()}) {
      ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK);
    }
  }

  ~Child() {
    if (pid_ > 0) {
      ::kill(-pid_, SIGKILL);
      int status;
      ::waitpid(pid_, &status, 0);
    }
  }

  // Pumps pending input and collects output until `done()` holds, stdout
  // closes, or the deadline passes. Returns false on timeout.
  template <typename Done>
  bool pump(std::chrono::steady_clock::time_point deadline, Done&& done) {
    while (!done()) {
      pollfd fds[3];
      int n = 0;
      int out_i = -1, err_i = -1, in_i = -1;
      if (stdout_.get() >= 0) {
        out_i = n;
        fds[n++] = {stdout_.get(), POLLIN, 0};
      }
      if (stderr_.get() >= 0) {
        err_i = n;
        fds[n++] = {stderr_.get(), POLLIN, 0};
      }
      if (stdin_.get() >= 0 && (written_ < pending_.size() || close_after_)) {
        in_i = n;
        fds[n++] = {stdin_.get(), POLLOUT, 0};
      }
      if (out_i < 0) return true;  // stdout closed; nothing more can arrive
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) return false;
      const int rc = ::poll(fds, static_cast<nfds_t>(n), static_cast<int>(std::min<long long>(left.count(), 1000)));
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError(std::string("poll: ") + std::strerror(errno), diagnostics_);
      }
      if (in_i >= 0 && (fds[in_i].revents & (POLLOUT | POLLERR | POLLHUP))) write_some();
      if (out_i >= 0 && (fds[out_i].revents & (POLLIN | POLLHUP | POLLERR))) read_into(stdout_, stdout_buf_, false);
      if (err_i >= 0 && (fds[err_i].revents & (POLLIN | POLLHUP | POLLERR))) read_into(stderr_, diagnostics_, true);
    }
    return true;
  }

  void send(std::string data, bool close_after) {
    pending_ = std::move(data);
    written_ = 0;
    close_after_ = close_after;
  }

  bool input_broken() const { return broken_pipe_; }
  std::string& out() { return stdout_buf_; }
  bool out_closed() const { return stdout_.get() < 0; }
  const std::string& diagnostics() const { return diagnostics_; }

  // Drains stderr briefly and reaps the child. Returns the wait status.
  int finish(std::chrono::steady_clock::time_point deadline) {
    while (stderr_.get() >= 0 && std::chrono::steady_clock::now() < deadline) {
      pollfd p{stderr_.get(), POLLIN, 0};
      if (::poll(&p, 1, 100) > 0) read_into(stderr_, diagnostics_, true);
    }
    int status = 0;
    while (true) {
      const pid_t r = ::waitpid(pid_, &status, WNOHANG);
      if (r == pid_) break;
      if (std::chrono::steady_clock::now() >= deadline) {
        ::kill(-pid_, SIGKILL);
        ::waitpid(pid_, &status, 0);
        break;
      }
      ::usleep(2000);
    }
    pid_ = -1;
    return status;
  }

 private:
  void write_some() {
    while (written_ < pending_.size()) {
      const ssize_t w = ::write(stdin_.get(), pending_.data() + written_, pending_.size() - written_);
      if (w > 0) {
        written_ += static_cast<std::size_t>(w);
        continue;
      }
      if (w < 0 && (errno == EAGAIN || errno == EINTR)) return;
      broken_pipe_ = true;
      stdin_.reset();
      return;
    }
    if (close_after_) stdin_.reset();
  }

  void read_into(Fd& fd, std::string& buf, bool capped) {
    char chunk[65536];
    while (true) {
      const ssize_t r = ::read(fd.get(), chunk, sizeof chunk);
      if (r > 0) {
        if (!capped || buf.size() < kMaxDiagnostics) buf.append(chunk, static_cast<std::size_t>(r));
        continue;
      }
      if (r < 0 && (errno == EAGAIN || errno == EINTR)) return;
      fd.reset();
      return;
    }
  }

  pid_t pid_ = -1;
  Fd stdin_, stdout_, stderr_;
  std::string pending_;
  std::size_t written_ = 0;
  bool close_after_ = false;
  bool broken_pipe_ = false;
  std::string stdout_buf_;
  std::string diagnostics_;
};

std::string trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return std::string(s);
}

std::string describe_status(int status) {
  if (WIFEXITED(status)) return fmt::format("exit status {}", WEXITSTATUS(status));
  if (WIFSIGNALED(status)) return fmt::format("signal {}", WTERMSIG(status));
  return "unknown termination";
}

}  // namespace

std::string encode_session(std::span<const LabeledSequence> train, std::span<const LabeledSequence> test) {
  std::string s = fmt::format("TRAIN {}\n", train.size());
  for (const auto& t : train) {
    s += std::to_string(static_cast<int>(t.label));
    s += '\t';
    append_values(s, t.seq);
  }
  s += fmt::format("TEST {}\n", test.size());
  for (const auto& t : test) append_values(s, t.seq);
  s += "END\n";
  return s;
}

std::vector<double> run_external(const ExternalModelSpec& spec, std::span<const LabeledSequence> train,
                                 std::span<const LabeledSequence> test) {
  spec.validate();
  const std::size_t n = !train.empty() ? train.front().seq.size() : (!test.empty() ? test.front().seq.size() : 0);
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(spec.timeout_seconds));
  const std::string who = "external model '" + spec.name + "'";
  Child child(spec.command);

  auto fail = [&](const std::string& what) -> std::vector<double> {
    child.finish(std::min(deadline, std::chrono::steady_clock::now() + std::chrono::milliseconds(200)));
    throw ProtocolError(who + ": " + what, child.diagnostics());
  };

  // Handshake.
  child.send(fmt::format("HIDSQ-EXT {} {}\n", kProtocolVersion, n), false);
  if (!child.pump(deadline, [&] { return child.out().find('\n') != std::string::npos; })) {
    return fail(fmt::format("timed out after {} s waiting for handshake", spec.timeout_seconds));
  }
  const auto eol = child.out().find('\n');
  if (eol == std::string::npos) return fail("handshake failed: child closed stdout without replying");
  const std::string reply = trim(std::string_view(child.out()).substr(0, eol));
  child.out().erase(0, eol + 1);
  if (reply != fmt::format("READY {}", kProtocolVersion)) {
    return fail(fmt::format("handshake failed: expected 'READY {}', got '{}'", kProtocolVersion, reply));
  }

  // Session: stream everything, collect score lines until stdout closes.
  child.send(encode_session(train, test), true);
  if (!child.pump(deadline, [] { return false; })) {
    return fail(fmt::format("timed out after {} s", spec.timeout_seconds));
  }
  const int status = child.finish(deadline);

  std::vector<double> scores;
  std::string_view rest = child.out();
  std::size_t line_no = 0;
  while (!rest.empty()) {
    auto e = rest.find('\n');
    std::string_view line = rest.substr(0, e);
    rest = e == std::string_view::npos ? std::string_view{} : rest.substr(e + 1);
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) {
      if (rest.empty()) break;
      throw ProtocolError(who + fmt::format(": response line {}: empty score", line_no), child.diagnostics());
    }
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v)) {
      throw ProtocolError(who + fmt::format(": response line {}: non-numeric score '{}'", line_no, t),
                          child.diagnostics());
    }
    scores.push_back(v);
  }
  const bool clean_exit = WIFEXITED(status) && WEXITSTATUS(status) == 0;
  if (!clean_exit) {
    throw ProtocolError(who + fmt::format(": child terminated abnormally ({}) after {} of {} scores",
                                          describe_status(status), scores.size(), test.size()),
                        child.diagnostics());
  }
  if (child.input_broken() && scores.size() != test.size()) {
    throw ProtocolError(who + ": child stopped reading input before the session ended", child.diagnostics());
  }
  if (scores.size() != test.size()) {
    throw ProtocolError(who + fmt::format(": expected {} scores, got {}", test.size(), scores.size()),
                        child.diagnostics());
  }
  return scores;
}

MetricsReport evaluate_external(const ExternalModelSpec& spec, const PreparedSplit& split) {
  const auto scores = run_external(spec, split.train, split.test);
  std::vector<Label> y(split.test.size()), pred(split.test.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = split.test[i].label;
    pred[i] = scores[i] > spec.threshold ? kIntrusion : kNormal;
  }
  MetricsReport r = evaluate(y, scores, pred);
  r.model = spec.name;
  r.params = spec.command;
  return r;
}

std::vector<ConformanceCheck> check_conformance(const ExternalModelSpec& spec) {
  std::vector<LabeledSequence> train, test;
  for (Syscall k = 0; k < 12; ++k) {
    const Label label = k % 2 ? kIntrusion : kNormal;
    Sequence s{{k, k + 1, k + 2, k + 3, k + 4, 100 + k}};
    train.push_back({s, label});
    train.push_back({s, label});
    if (k % 3 == 0) test.push_back({s, label});
  }
  std::vector<ConformanceCheck> out;
  std::vector<double> first;
  try {
    first = run_external(spec, train, test);
    out.push_back({"session", true, fmt::format("{} scores for {} test lines", first.size(), test.size())});
  } catch (const ProtocolError& e) {
    std::string detail = e.what();
    if (!e.diagnostics().empty()) detail += " | stderr: " + e.diagnostics();
    out.push_back({"session", false, detail});
    return out;
  }
  try {
    const auto second = run_external(spec, train, test);
    out.push_back({"deterministic", second == first, second == first ? "identical scores" : "scores differ"});
  } catch (const ProtocolError& e) {
    out.push_back({"deterministic", false, e.what()});
  }
  std::size_t errors = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    errors += (first[i] > spec.threshold ? kIntrusion : kNormal) != test[i].label;
  }
  out.push_back({"memorized", errors == 0, fmt::format("{} of {} memorized values misclassified", errors, test.size())});
  return out;
}

}  // namespace hidsq
