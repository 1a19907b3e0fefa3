#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace misspec {

enum class TileKind : std::uint8_t { Orange, Purple, Cyan, Neutral, Wall, Goal };

enum class Action : std::uint8_t { North, South, East, West };

inline constexpr std::array<Action, 4> kActions{Action::North, Action::South, Action::East,
                                                Action::West};
inline constexpr int kNumActions = 4;
inline constexpr int kNumHypotheses = 8;
inline constexpr int kNumColors = 3;

inline constexpr double kGoalValue = 10.0;
inline constexpr double kDangerValue = -2.0;

char action_char(Action a);
Action action_from_char(char c);

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

class GridError : public std::runtime_error {
 public:
  enum class Kind { NonRectangular, UnknownChar, MissingStart, DuplicateStart, MissingGoal,
                    DuplicateGoal, BadParameter, Io };
  GridError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// One of the eight safe/dangerous assignments to the three tile colors.
/// Bit b of the index is set when color b (Orange=0, Purple=1, Cyan=2) is dangerous.
class RewardHypothesis {
 public:
  explicit RewardHypothesis(int index);
  int index() const { return index_; }
  bool dangerous(TileKind color) const;
  /// Value of entering a tile of the given kind. Walls are never entered.
  double tile_value(TileKind kind) const;

 private:
  int index_;
};

/// Immutable gridworld with deterministic 4-connected motion.
class GridWorld {
 public:
  GridWorld(int height, int width, std::vector<TileKind> tiles, Cell start, Cell goal,
            double discount = 0.99, int max_steps = 20);

  int height() const { return height_; }
  int width() const { return width_; }
  int num_cells() const { return height_ * width_; }
  Cell start() const { return start_; }
  Cell goal() const { return goal_; }
  double discount() const { return discount_; }
  int max_steps() const { return max_steps_; }

  GridWorld with_discount(double discount) const;
  GridWorld with_max_steps(int max_steps) const;

  bool in_bounds(Cell c) const { return c.row >= 0 && c.row < height_ && c.col >= 0 && c.col < width_; }
  TileKind tile(Cell c) const { return tiles_[static_cast<std::size_t>(index(c))]; }
  int index(Cell c) const { return c.row * width_ + c.col; }
  Cell cell(int idx) const { return {idx / width_, idx % width_}; }
  bool is_wall(Cell c) const { return tile(c) == TileKind::Wall; }
  /// Colors (Orange, Purple, Cyan) that appear at least once in the grid.
  std::array<bool, kNumColors> colors_present() const;

  std::string to_text() const;

 private:
  int height_;
  int width_;
  std::vector<TileKind> tiles_;
  Cell start_;
  Cell goal_;
  double discount_;
  int max_steps_;
};

GridWorld load_grid(std::string_view text);
GridWorld load_grid_file(const std::string& path);

struct StepResult {
  Cell next;
  bool done;
};

StepResult step(const GridWorld& g, Cell s, Action a);

double reward_of(const GridWorld& g, const RewardHypothesis& r, Cell s, Action a, Cell next);

/// Q over (cell, action) for each remaining horizon, or a single converged layer.
class QTable {
 public:
  QTable(int num_cells, int horizon);

  /// 0 for the converged infinite-horizon table.
  int horizon() const { return horizon_; }
  /// For finite tables, remaining must be in [1, horizon]; remaining 0 is identically zero.
  /// Infinite tables ignore `remaining`.
  double operator()(int cell_index, Action a, int remaining = 0) const;
  double& ref(int cell_index, Action a, int remaining);
  double max_value(int cell_index, int remaining = 0) const;

 private:
  std::size_t slot(int cell_index, Action a, int remaining) const;
  int num_cells_;
  int horizon_;
  std::vector<double> values_;
};

/// Finite horizon (horizon >= 1): exact backward induction.
/// horizon == 0: value iteration until the sup-norm change drops below tol.
QTable q_values(const GridWorld& g, const RewardHypothesis& r, int horizon, double tol = 1e-8);

}  // namespace misspec
