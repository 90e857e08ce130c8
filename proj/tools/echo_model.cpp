// Reference external model for the line protocol. Scores a test sequence by
// the mean training label of identical sequences, or 0.5 if unseen.
//
// --fault=<mode> makes it misbehave on purpose, for protocol tests:
//   nonnumeric     second score line is not a number
//   exit-mid-test  exits with status 3 after reading half of the TEST block
//   bad-handshake  replies with a wrong version
//   short          omits the last score line
//   hang           never replies to the handshake

#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace {

bool read_line(std::string& line) {
  if (!std::getline(std::cin, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

[[noreturn]] void die(const std::string& msg) {
  std::cerr << "hidsq-echo-model: " << msg << '\n';
  std::exit(2);
}

std::size_t count_after(const std::string& line, const std::string& keyword) {
  std::istringstream in(line);
  std::string word;
  std::size_t n = 0;
  if (!(in >> word >> n) || word != keyword) die("expected '" + keyword + " <count>', got '" + line + "'");
  return n;
}

}  // namespace

int main(int argc, char** argv) {
  std::string fault;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a.rfind("--fault=", 0) == 0) {
      fault = a.substr(8);
    } else {
      die("unknown argument '" + a + "'");
    }
  }
  std::ios::sync_with_stdio(false);

  std::string line;
  if (!read_line(line)) die("no header");
  if (line.rfind("HIDSQ-EXT 1 ", 0) != 0) die("unsupported header '" + line + "'");
  if (fault == "hang") {
    std::this_thread::sleep_for(std::chrono::hours(1));
    return 0;
  }
  std::cout << (fault == "bad-handshake" ? "READY 99" : "READY 1") << std::endl;

  if (!read_line(line)) die("missing TRAIN");
  const std::size_t k = count_after(line, "TRAIN");
  std::map<std::string, std::pair<double, std::size_t>> table;
  for (std::size_t i = 0; i < k; ++i) {
    if (!read_line(line)) die("truncated TRAIN block");
    const auto tab = line.find('\t');
    if (tab == std::string::npos) die("TRAIN line without label");
    auto& e = table[line.substr(tab + 1)];
    e.first += std::stod(line.substr(0, tab));
    e.second += 1;
  }

  if (!read_line(line)) die("missing TEST");
  const std::size_t m = count_after(line, "TEST");
  std::vector<double> scores;
  scores.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (fault == "exit-mid-test" && i == m / 2) {
      std::cerr << "hidsq-echo-model: exiting mid-test on request\n";
      std::exit(3);
    }
    if (!read_line(line)) die("truncated TEST block");
    auto it = table.find(line);
    scores.push_back(it == table.end() ? 0.5 : it->second.first / static_cast<double>(it->second.second));
  }
  if (!read_line(line) || line != "END") die("missing END");

  const std::size_t emit = fault == "short" && m > 0 ? m - 1 : m;
  for (std::size_t i = 0; i < emit; ++i) {
    if (fault == "nonnumeric" && i == 1) {
      std::cout << "high\n";
      continue;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g\n", scores[i]);
    std::cout << buf;
  }
  std::cout.flush();
  return 0;
}
