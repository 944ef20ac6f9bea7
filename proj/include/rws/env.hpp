#pragma once

// Deterministic gridworld maze with a sparse goal-reaching reward.

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rws {

struct State {
  int x = 0;
  int y = 0;
  friend constexpr auto operator<=>(const State&, const State&) = default;
};

struct Goal {
  int x = 0;
  int y = 0;
  friend constexpr auto operator<=>(const Goal&, const Goal&) = default;
};

// Up moves +y, Down -y. The numeric values are part of the file formats.
enum class Action : std::uint8_t { Up = 0, Down = 1, Left = 2, Right = 3 };

inline constexpr int kNumActions = 4;
inline constexpr std::array<Action, kNumActions> kAllActions = {
    Action::Up, Action::Down, Action::Left, Action::Right};

inline constexpr int action_index(Action a) noexcept { return static_cast<int>(a); }
Action action_from_index(int index);
std::string_view action_name(Action a) noexcept;

inline constexpr double kDefaultDelta = 0.5;

class Maze {
 public:
  // Throws ValidationError when an invariant does not hold.
  Maze(int width, int height, std::vector<State> walls, std::vector<State> start_cells);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int cell_count() const noexcept { return width_ * height_; }
  const std::vector<State>& start_cells() const noexcept { return start_cells_; }

  bool in_bounds(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }
  bool is_wall(int x, int y) const noexcept {
    return in_bounds(x, y) && wall_[static_cast<std::size_t>(y * width_ + x)] != 0;
  }
  bool is_free(int x, int y) const noexcept { return in_bounds(x, y) && !is_wall(x, y); }
  bool is_valid(State s) const noexcept { return is_free(s.x, s.y); }
  bool is_valid(Goal g) const noexcept { return is_free(g.x, g.y); }

  // Row-major cell index, y * width + x.
  int cell_index(int x, int y) const noexcept { return y * width_ + x; }
  int cell_index(State s) const noexcept { return cell_index(s.x, s.y); }
  int cell_index(Goal g) const noexcept { return cell_index(g.x, g.y); }
  State state_at(int cell) const noexcept { return {cell % width_, cell / width_}; }

  // Non-wall cells in row-major order.
  std::vector<State> free_cells() const;
  std::vector<State> walls() const;

  // Text form: "width height" then one row per y, y = 0 first.
  std::string to_text() const;
  // 16 hex digits, FNV-1a over to_text().
  std::string hash() const;

  friend bool operator==(const Maze&, const Maze&) = default;

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> wall_;
  std::vector<State> start_cells_;
};

// '#' wall, '.' free, 'S' start (free). Throws ParseError or ValidationError.
Maze parse_maze(std::string_view text);
Maze load_maze(const std::string& path);

// Empty rectangle with the given start cells (all cells when empty).
Maze open_maze(int width, int height, std::vector<State> start_cells = {});

// Throws MalformedStateError when s is out of bounds or a wall.
void require_valid(const Maze& maze, State s);
void require_valid(const Maze& maze, Goal g);

State step(const Maze& maze, State s, Action a);

inline constexpr Goal phi(State s) noexcept { return {s.x, s.y}; }

inline constexpr double squared_distance(Goal a, Goal b) noexcept {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

// 0 when |phi(s) - g|^2 < delta, else -1.
inline constexpr double reward(State s, Goal g, double delta) noexcept {
  return squared_distance(phi(s), g) < delta ? 0.0 : -1.0;
}

inline constexpr bool is_terminal(State s, Goal g, double delta) noexcept {
  return reward(s, g, delta) == 0.0;
}

// Shortest-path step counts to `target` over the maze dynamics, indexed by
// cell; -1 for walls and cells that cannot reach the target.
std::vector<int> distances_to(const Maze& maze, State target);

}  // namespace rws
