#include "loadgan/grid/case.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

#include "loadgan/corpus_io.hpp"
#include "loadgan/error.hpp"

namespace loadgan::grid {

namespace {

constexpr std::size_t kBusColumns = 13;
constexpr std::size_t kGenRequired = 10;
constexpr std::size_t kGenStandard = 21;
constexpr std::size_t kBranchRequired = 11;
constexpr std::size_t kBranchStandard = 13;

struct Cell {
  double value;
  std::size_t offset;
};
using Row = std::vector<Cell>;

struct Matrix {
  std::vector<Row> rows;
  std::size_t offset = 0;
};

class Scanner {
 public:
  explicit Scanner(std::string_view text) : text_(text) {}

  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return done() ? '\0' : text_[pos_]; }
  std::size_t pos() const { return pos_; }
  void advance() { ++pos_; }

  std::string where(std::size_t offset) const {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < offset && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
  }

  [[noreturn]] void error(std::size_t offset, const std::string& message) const {
    fail(ErrorCode::ParseError, where(offset) + ": " + message);
  }

  void skip_comment() {
    while (!done() && peek() != '\n') advance();
  }

  // Skips spaces, tabs and comments; newlines too when `newlines` is set.
  void skip_blank(bool newlines) {
    while (!done()) {
      const char c = peek();
      if (c == '%') {
        skip_comment();
      } else if (c == ' ' || c == '\t' || c == '\r' || (newlines && c == '\n')) {
        advance();
      } else if (c == '.' && pos_ + 2 < text_.size() && text_.substr(pos_, 3) == "...") {
        // Continuation: rest of the line is ignored and the newline swallowed.
        skip_comment();
        if (!done()) advance();
      } else {
        break;
      }
    }
  }

  std::string_view word() {
    const std::size_t start = pos_;
    while (!done() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '.')) advance();
    return text_.substr(start, pos_ - start);
  }

  void skip_line() {
    skip_comment();
    if (!done()) advance();
  }

  double number() {
    const std::size_t start = pos_;
    while (!done()) {
      const char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '+' || c == '-') {
        advance();
      } else {
        break;
      }
    }
    std::string_view token = text_.substr(start, pos_ - start);
    if (token.empty()) error(start, std::string("expected a number, found '") + peek() + "'");
    bool negative = false;
    std::string_view body = token;
    if (body.front() == '-' || body.front() == '+') {
      negative = body.front() == '-';
      body.remove_prefix(1);
    }
    if (body == "Inf" || body == "inf") return negative ? -std::numeric_limits<double>::infinity()
                                                         : std::numeric_limits<double>::infinity();
    double value = 0.0;
    const auto [end, ec] = std::from_chars(token.data() + (token.front() == '+' ? 1 : 0), token.data() + token.size(), value);
    if (ec != std::errc() || end != token.data() + token.size() || std::isnan(value)) {
      error(start, "malformed number '" + std::string(token) + "'");
    }
    return value;
  }

  Matrix matrix() {
    Matrix m;
    m.offset = pos_;
    advance();  // '['
    Row row;
    auto finish_row = [&] {
      if (!row.empty()) m.rows.push_back(std::move(row));
      row.clear();
    };
    while (true) {
      skip_blank(false);
      if (done()) error(m.offset, "unterminated matrix");
      const char c = peek();
      if (c == ']') {
        advance();
        finish_row();
        break;
      }
      if (c == ';' || c == '\n') {
        advance();
        finish_row();
        continue;
      }
      if (c == ',') {
        advance();
        continue;
      }
      const std::size_t at = pos_;
      row.push_back({number(), at});
    }
    skip_blank(false);
    if (peek() == ';') advance();
    return m;
  }

  // Skips a `{ ... }` cell array, honoring nesting and quoted strings.
  void skip_cell() {
    const std::size_t start = pos_;
    int depth = 0;
    bool quoted = false;
    while (!done()) {
      const char c = peek();
      advance();
      if (quoted) {
        if (c == '\'') quoted = false;
        continue;
      }
      if (c == '\'') quoted = true;
      if (c == '%') skip_comment();
      if (c == '{') ++depth;
      if (c == '}' && --depth == 0) {
        skip_blank(false);
        if (peek() == ';') advance();
        return;
      }
    }
    error(start, "unterminated cell array");
  }

  // Raw text of a scalar statement up to ';' or end of line.
  std::string_view statement() {
    const std::size_t start = pos_;
    while (!done() && peek() != ';' && peek() != '\n' && peek() != '%') advance();
    std::string_view s = text_.substr(start, pos_ - start);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    if (peek() == ';') advance();
    return s;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

int as_int(const Scanner& sc, const Cell& cell, const char* what) {
  if (!std::isfinite(cell.value) || cell.value != std::floor(cell.value) ||
      std::abs(cell.value) > std::numeric_limits<int>::max()) {
    sc.error(cell.offset, std::string(what) + " must be an integer");
  }
  return static_cast<int>(cell.value);
}

bool as_status(const Scanner& sc, const Cell& cell) {
  const int v = as_int(sc, cell, "status");
  return v > 0;
}

void check_columns(const Scanner& sc, const Matrix& m, const char* name, std::size_t required, std::size_t standard,
                   std::vector<std::string>& warnings) {
  std::size_t width = 0;
  for (const auto& row : m.rows) {
    if (width == 0) width = row.size();
    if (row.size() != width) sc.error(row.front().offset, std::string("mpc.") + name + " rows have unequal lengths");
    if (row.size() < required) {
      sc.error(row.front().offset, std::string("mpc.") + name + " needs at least " + std::to_string(required) +
                                       " columns, found " + std::to_string(row.size()));
    }
  }
  if (width > standard) {
    warnings.push_back(std::string("mpc.") + name + ": " + std::to_string(width - standard) +
                       " columns beyond the standard " + std::to_string(standard) + " ignored");
  }
}

BusType bus_type(const Scanner& sc, const Cell& cell) {
  const int t = as_int(sc, cell, "bus type");
  if (t < 1 || t > 4) sc.error(cell.offset, "bus type must be 1..4");
  return static_cast<BusType>(t);
}

std::string fmt(double v) { return corpus::format_double(v); }

}  // namespace

std::size_t GridCase::bus_index(int id) const {
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].id == id) return i;
  }
  fail(ErrorCode::TopologyError, "unknown bus " + std::to_string(id));
}

std::size_t GridCase::slack_index() const {
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].type == BusType::Slack) return i;
  }
  fail(ErrorCode::TopologyError, "case has no slack bus");
}

void GridCase::validate() const {
  if (!(base_mva > 0.0)) fail(ErrorCode::TopologyError, "baseMVA must be positive");
  if (buses.empty()) fail(ErrorCode::TopologyError, "case has no buses");
  std::set<int> ids;
  std::size_t slack = 0;
  for (const auto& b : buses) {
    if (!ids.insert(b.id).second) fail(ErrorCode::TopologyError, "duplicate bus id " + std::to_string(b.id));
    slack += b.type == BusType::Slack;
  }
  if (slack != 1) fail(ErrorCode::TopologyError, "case needs exactly one slack bus, found " + std::to_string(slack));
  for (const auto& br : branches) {
    if (!ids.count(br.from) || !ids.count(br.to)) {
      fail(ErrorCode::TopologyError,
           "branch " + std::to_string(br.from) + "-" + std::to_string(br.to) + " references a missing bus");
    }
    if (br.in_service && br.r * br.r + br.x * br.x <= 0.0) {
      fail(ErrorCode::TopologyError,
           "branch " + std::to_string(br.from) + "-" + std::to_string(br.to) + " has zero impedance");
    }
  }
  for (const auto& g : generators) {
    if (!ids.count(g.bus)) fail(ErrorCode::TopologyError, "generator at missing bus " + std::to_string(g.bus));
  }
}

GridCase parse_matpower_case(std::string_view text) {
  Scanner sc(text);
  GridCase grid;
  bool have_base = false;
  std::optional<Matrix> bus, gen, branch;

  while (true) {
    sc.skip_blank(true);
    if (sc.done()) break;
    const std::size_t start = sc.pos();
    if (sc.peek() == ';') {
      sc.advance();
      continue;
    }
    const std::string_view head = sc.word();
    if (head.empty()) sc.error(start, std::string("unexpected character '") + sc.peek() + "'");
    if (head == "function" || head == "end" || head == "return") {
      sc.skip_line();
      continue;
    }
    if (head.substr(0, 4) != "mpc.") {
      grid.warnings.push_back(sc.where(start) + ": ignored statement '" + std::string(head) + "'");
      sc.skip_line();
      continue;
    }
    const std::string name(head.substr(4));
    sc.skip_blank(false);
    if (sc.peek() != '=') sc.error(sc.pos(), "expected '=' after mpc." + name);
    sc.advance();
    sc.skip_blank(false);

    if (sc.peek() == '[') {
      Matrix m = sc.matrix();
      if (name == "bus") {
        bus = std::move(m);
      } else if (name == "gen") {
        gen = std::move(m);
      } else if (name == "branch") {
        branch = std::move(m);
      } else {
        grid.warnings.push_back("mpc." + name + " ignored");
      }
    } else if (sc.peek() == '{') {
      sc.skip_cell();
      grid.warnings.push_back("mpc." + name + " ignored");
    } else {
      const std::size_t at = sc.pos();
      const std::string_view value = sc.statement();
      if (name == "baseMVA") {
        Scanner inner(value);
        const double v = inner.number();
        inner.skip_blank(false);
        if (!inner.done() || !std::isfinite(v)) sc.error(at, "malformed mpc.baseMVA");
        grid.base_mva = v;
        have_base = true;
      } else if (name != "version") {
        grid.warnings.push_back("mpc." + name + " ignored");
      }
    }
  }

  if (!have_base) fail(ErrorCode::MissingSection, "case lacks mpc.baseMVA");
  if (!bus) fail(ErrorCode::MissingSection, "case lacks mpc.bus");
  if (!gen) fail(ErrorCode::MissingSection, "case lacks mpc.gen");
  if (!branch) fail(ErrorCode::MissingSection, "case lacks mpc.branch");

  check_columns(sc, *bus, "bus", kBusColumns, kBusColumns, grid.warnings);
  check_columns(sc, *gen, "gen", kGenRequired, kGenStandard, grid.warnings);
  check_columns(sc, *branch, "branch", kBranchRequired, kBranchStandard, grid.warnings);

  for (const auto& r : bus->rows) {
    Bus b;
    b.id = as_int(sc, r[0], "bus id");
    b.type = bus_type(sc, r[1]);
    b.pd = r[2].value;
    b.qd = r[3].value;
    b.gs = r[4].value;
    b.bs = r[5].value;
    b.area = as_int(sc, r[6], "area");
    b.vm = r[7].value;
    b.va = r[8].value;
    b.base_kv = r[9].value;
    b.zone = as_int(sc, r[10], "zone");
    b.vmax = r[11].value;
    b.vmin = r[12].value;
    grid.buses.push_back(b);
  }
  for (const auto& r : gen->rows) {
    Generator g;
    g.bus = as_int(sc, r[0], "generator bus");
    g.pg = r[1].value;
    g.qg = r[2].value;
    g.qmax = r[3].value;
    g.qmin = r[4].value;
    g.vg = r[5].value;
    g.mbase = r[6].value;
    g.in_service = as_status(sc, r[7]);
    g.pmax = r[8].value;
    g.pmin = r[9].value;
    grid.generators.push_back(g);
  }
  for (const auto& r : branch->rows) {
    Branch br;
    br.from = as_int(sc, r[0], "branch from-bus");
    br.to = as_int(sc, r[1], "branch to-bus");
    br.r = r[2].value;
    br.x = r[3].value;
    br.b = r[4].value;
    br.rate_a = r[5].value;
    br.rate_b = r[6].value;
    br.rate_c = r[7].value;
    br.ratio = r[8].value;
    br.angle = r[9].value;
    br.in_service = as_status(sc, r[10]);
    if (r.size() > 12) {
      br.angmin = r[11].value;
      br.angmax = r[12].value;
    }
    grid.branches.push_back(br);
  }
  grid.validate();
  return grid;
}

GridCase load_matpower_case(const std::string& path) { return parse_matpower_case(corpus::read_text_file(path)); }

std::string serialize_matpower_case(const GridCase& grid) {
  std::ostringstream out;
  out << "function mpc = loadgan_case\n";
  out << "mpc.version = '2';\n";
  out << "mpc.baseMVA = " << fmt(grid.base_mva) << ";\n\n";
  out << "%% bus_i type Pd Qd Gs Bs area Vm Va baseKV zone Vmax Vmin\n";
  out << "mpc.bus = [\n";
  for (const auto& b : grid.buses) {
    out << '\t' << b.id << '\t' << static_cast<int>(b.type) << '\t' << fmt(b.pd) << '\t' << fmt(b.qd) << '\t'
        << fmt(b.gs) << '\t' << fmt(b.bs) << '\t' << b.area << '\t' << fmt(b.vm) << '\t' << fmt(b.va) << '\t'
        << fmt(b.base_kv) << '\t' << b.zone << '\t' << fmt(b.vmax) << '\t' << fmt(b.vmin) << ";\n";
  }
  out << "];\n\n";
  out << "%% bus Pg Qg Qmax Qmin Vg mBase status Pmax Pmin\n";
  out << "mpc.gen = [\n";
  for (const auto& g : grid.generators) {
    out << '\t' << g.bus << '\t' << fmt(g.pg) << '\t' << fmt(g.qg) << '\t' << fmt(g.qmax) << '\t' << fmt(g.qmin)
        << '\t' << fmt(g.vg) << '\t' << fmt(g.mbase) << '\t' << (g.in_service ? 1 : 0) << '\t' << fmt(g.pmax)
        << '\t' << fmt(g.pmin) << ";\n";
  }
  out << "];\n\n";
  out << "%% fbus tbus r x b rateA rateB rateC ratio angle status angmin angmax\n";
  out << "mpc.branch = [\n";
  for (const auto& br : grid.branches) {
    out << '\t' << br.from << '\t' << br.to << '\t' << fmt(br.r) << '\t' << fmt(br.x) << '\t' << fmt(br.b) << '\t'
        << fmt(br.rate_a) << '\t' << fmt(br.rate_b) << '\t' << fmt(br.rate_c) << '\t' << fmt(br.ratio) << '\t'
        << fmt(br.angle) << '\t' << (br.in_service ? 1 : 0) << '\t' << fmt(br.angmin) << '\t' << fmt(br.angmax)
        << ";\n";
  }
  out << "];\n";
  return out.str();
}

}  // namespace loadgan::grid
