#include "misspec/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace misspec {

char action_char(Action a) {
  switch (a) {
    case Action::North: return 'N';
    case Action::South: return 'S';
    case Action::East: return 'E';
    case Action::West: return 'W';
  }
  return '?';
}

Action action_from_char(char c) {
  switch (c) {
    case 'N': return Action::North;
    case 'S': return Action::South;
    case 'E': return Action::East;
    case 'W': return Action::West;
    default: throw std::invalid_argument(std::string("unknown action '") + c + "'");
  }
}

RewardHypothesis::RewardHypothesis(int index) : index_(index) {
  if (index < 0 || index >= kNumHypotheses) {
    throw std::out_of_range("reward hypothesis index " + std::to_string(index));
  }
}

bool RewardHypothesis::dangerous(TileKind color) const {
  switch (color) {
    case TileKind::Orange: return (index_ & 1) != 0;
    case TileKind::Purple: return (index_ & 2) != 0;
    case TileKind::Cyan: return (index_ & 4) != 0;
    default: return false;
  }
}

double RewardHypothesis::tile_value(TileKind kind) const {
  switch (kind) {
    case TileKind::Goal: return kGoalValue;
    case TileKind::Orange:
    case TileKind::Purple:
    case TileKind::Cyan: return dangerous(kind) ? kDangerValue : 0.0;
    default: return 0.0;
  }
}

GridWorld::GridWorld(int height, int width, std::vector<TileKind> tiles, Cell start, Cell goal,
                     double discount, int max_steps)
    : height_(height), width_(width), tiles_(std::move(tiles)), start_(start), goal_(goal),
      discount_(discount), max_steps_(max_steps) {
  using K = GridError::Kind;
  if (height_ <= 0 || width_ <= 0 || tiles_.size() != static_cast<std::size_t>(height_ * width_)) {
    throw GridError(K::NonRectangular, "tile count does not match grid dimensions");
  }
  if (!(discount_ > 0.0 && discount_ <= 1.0)) {
    throw GridError(K::BadParameter, "discount must lie in (0, 1]");
  }
  if (max_steps_ <= 0) throw GridError(K::BadParameter, "max_steps must be positive");
  if (!in_bounds(start_) || is_wall(start_)) throw GridError(K::MissingStart, "bad start cell");
  if (!in_bounds(goal_) || tile(goal_) != TileKind::Goal) throw GridError(K::MissingGoal, "bad goal cell");
  if (std::count(tiles_.begin(), tiles_.end(), TileKind::Goal) != 1) {
    throw GridError(K::DuplicateGoal, "grid must contain exactly one goal");
  }
  if (start_ == goal_) throw GridError(K::DuplicateGoal, "start and goal coincide");
}

GridWorld GridWorld::with_discount(double discount) const {
  return GridWorld(height_, width_, tiles_, start_, goal_, discount, max_steps_);
}

GridWorld GridWorld::with_max_steps(int max_steps) const {
  return GridWorld(height_, width_, tiles_, start_, goal_, discount_, max_steps);
}

std::array<bool, kNumColors> GridWorld::colors_present() const {
  std::array<bool, kNumColors> present{};
  for (TileKind t : tiles_) {
    if (t == TileKind::Orange) present[0] = true;
    if (t == TileKind::Purple) present[1] = true;
    if (t == TileKind::Cyan) present[2] = true;
  }
  return present;
}

std::string GridWorld::to_text() const {
  std::string out;
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) {
      Cell cell{r, c};
      if (cell == start_) {
        out += 'S';
        continue;
      }
      switch (tile(cell)) {
        case TileKind::Orange: out += 'o'; break;
        case TileKind::Purple: out += 'p'; break;
        case TileKind::Cyan: out += 'c'; break;
        case TileKind::Neutral: out += '.'; break;
        case TileKind::Wall: out += '#'; break;
        case TileKind::Goal: out += 'G'; break;
      }
    }
    out += '\n';
  }
  return out;
}

GridWorld load_grid(std::string_view text) {
  using K = GridError::Kind;
  std::vector<std::string> rows;
  std::string current;
  for (char ch : text) {
    if (ch == '\r') continue;
    if (ch == '\n') {
      rows.push_back(current);
      current.clear();
    } else {
      current += ch;
    }
  }
  if (!current.empty()) rows.push_back(current);
  while (!rows.empty() && rows.back().empty()) rows.pop_back();
  if (rows.empty()) throw GridError(K::NonRectangular, "empty grid");

  const int height = static_cast<int>(rows.size());
  const int width = static_cast<int>(rows.front().size());
  std::vector<TileKind> tiles;
  tiles.reserve(static_cast<std::size_t>(height * width));
  int starts = 0, goals = 0;
  Cell start, goal;
  for (int r = 0; r < height; ++r) {
    if (static_cast<int>(rows[r].size()) != width || width == 0) {
      throw GridError(K::NonRectangular, "row " + std::to_string(r) + " has a different length");
    }
    for (int c = 0; c < width; ++c) {
      switch (rows[r][c]) {
        case 'S':
          tiles.push_back(TileKind::Neutral);
          start = {r, c};
          ++starts;
          break;
        case 'G':
          tiles.push_back(TileKind::Goal);
          goal = {r, c};
          ++goals;
          break;
        case 'o': tiles.push_back(TileKind::Orange); break;
        case 'p': tiles.push_back(TileKind::Purple); break;
        case 'c': tiles.push_back(TileKind::Cyan); break;
        case '.': tiles.push_back(TileKind::Neutral); break;
        case '#': tiles.push_back(TileKind::Wall); break;
        default:
          throw GridError(K::UnknownChar, std::string("unknown grid character '") + rows[r][c] + "'");
      }
    }
  }
  if (starts == 0) throw GridError(K::MissingStart, "grid has no 'S'");
  if (starts > 1) throw GridError(K::DuplicateStart, "grid has more than one 'S'");
  if (goals == 0) throw GridError(K::MissingGoal, "grid has no 'G'");
  if (goals > 1) throw GridError(K::DuplicateGoal, "grid has more than one 'G'");
  return GridWorld(height, width, std::move(tiles), start, goal);
}

GridWorld load_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GridError(GridError::Kind::Io, "cannot open grid file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_grid(buf.str());
}

StepResult step(const GridWorld& g, Cell s, Action a) {
  Cell next = s;
  switch (a) {
    case Action::North: --next.row; break;
    case Action::South: ++next.row; break;
    case Action::East: ++next.col; break;
    case Action::West: --next.col; break;
  }
  if (!g.in_bounds(next) || g.is_wall(next)) next = s;
  return {next, next == g.goal()};
}

double reward_of(const GridWorld& g, const RewardHypothesis& r, Cell /*s*/, Action /*a*/, Cell next) {
  return r.tile_value(g.tile(next));
}

QTable::QTable(int num_cells, int horizon)
    : num_cells_(num_cells), horizon_(horizon),
      values_(static_cast<std::size_t>(num_cells) * kNumActions *
                  static_cast<std::size_t>(std::max(horizon, 1)),
              0.0) {}

std::size_t QTable::slot(int cell_index, Action a, int remaining) const {
  const int layer = horizon_ == 0 ? 0 : remaining - 1;
  return (static_cast<std::size_t>(layer) * num_cells_ + cell_index) * kNumActions +
         static_cast<std::size_t>(a);
}

double QTable::operator()(int cell_index, Action a, int remaining) const {
  if (horizon_ != 0) {
    if (remaining <= 0) return 0.0;
    if (remaining > horizon_) throw std::out_of_range("remaining horizon exceeds table");
  }
  return values_[slot(cell_index, a, remaining)];
}

double& QTable::ref(int cell_index, Action a, int remaining) {
  return values_[slot(cell_index, a, remaining)];
}

double QTable::max_value(int cell_index, int remaining) const {
  double best = (*this)(cell_index, kActions[0], remaining);
  for (int i = 1; i < kNumActions; ++i) best = std::max(best, (*this)(cell_index, kActions[i], remaining));
  return best;
}

namespace {

double backup(const GridWorld& g, const RewardHypothesis& r, Cell s, Action a,
              const auto& next_value) {
  const auto [next, done] = step(g, s, a);
  const double reward = reward_of(g, r, s, a, next);
  return done ? reward : reward + g.discount() * next_value(g.index(next));
}

}  // namespace

QTable q_values(const GridWorld& g, const RewardHypothesis& r, int horizon, double tol) {
  if (horizon < 0) throw std::invalid_argument("horizon must be non-negative");
  const int goal = g.index(g.goal());
  QTable q(g.num_cells(), horizon);

  if (horizon > 0) {
    for (int h = 1; h <= horizon; ++h) {
      for (int idx = 0; idx < g.num_cells(); ++idx) {
        const Cell s = g.cell(idx);
        if (idx == goal || g.is_wall(s)) continue;
        for (Action a : kActions) {
          q.ref(idx, a, h) = backup(g, r, s, a, [&](int n) { return q.max_value(n, h - 1); });
        }
      }
    }
    return q;
  }

  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive in infinite-horizon mode");
  if (g.discount() >= 1.0) throw std::invalid_argument("infinite-horizon mode requires discount < 1");
  std::vector<double> value(static_cast<std::size_t>(g.num_cells()), 0.0);
  for (;;) {
    double change = 0.0;
    std::vector<double> next_value = value;
    for (int idx = 0; idx < g.num_cells(); ++idx) {
      const Cell s = g.cell(idx);
      if (idx == goal || g.is_wall(s)) continue;
      double best = -1e300;
      for (Action a : kActions) {
        const double v = backup(g, r, s, a, [&](int n) { return value[static_cast<std::size_t>(n)]; });
        q.ref(idx, a, 0) = v;
        best = std::max(best, v);
      }
      next_value[static_cast<std::size_t>(idx)] = best;
      change = std::max(change, std::abs(best - value[static_cast<std::size_t>(idx)]));
    }
    value = std::move(next_value);
    if (change < tol) break;
  }
  return q;
}

}  // namespace misspec
