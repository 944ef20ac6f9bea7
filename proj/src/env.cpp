#include "rws/env.hpp"

#include <cstdio>
#include <deque>
#include <fstream>
#include <sstream>

#include "rws/error.hpp"

namespace rws {

namespace {

constexpr std::array<std::array<int, 2>, kNumActions> kOffsets = {{
    {0, 1},   // Up
    {0, -1},  // Down
    {-1, 0},  // Left
    {1, 0},   // Right
}};

std::string cell_str(State s) {
  return "(" + std::to_string(s.x) + "," + std::to_string(s.y) + ")";
}

}  // namespace

Action action_from_index(int index) {
  if (index < 0 || index >= kNumActions) {
    throw ValidationError("action index out of range: " + std::to_string(index));
  }
  return static_cast<Action>(index);
}

std::string_view action_name(Action a) noexcept {
  switch (a) {
    case Action::Up: return "Up";
    case Action::Down: return "Down";
    case Action::Left: return "Left";
    case Action::Right: return "Right";
  }
  return "?";
}

Maze::Maze(int width, int height, std::vector<State> walls, std::vector<State> start_cells)
    : width_(width), height_(height), start_cells_(std::move(start_cells)) {
  if (width <= 0 || height <= 0) throw ValidationError("maze dimensions must be positive");
  if (width * height < 2) throw ValidationError("maze needs at least two cells");
  wall_.assign(static_cast<std::size_t>(width * height), 0);
  for (State w : walls) {
    if (!in_bounds(w.x, w.y)) throw ValidationError("wall out of bounds at " + cell_str(w));
    wall_[static_cast<std::size_t>(cell_index(w))] = 1;
  }
  if (start_cells_.empty()) throw ValidationError("maze needs at least one start cell");
  for (State s : start_cells_) {
    if (!is_valid(s)) throw ValidationError("start cell " + cell_str(s) + " is not a free cell");
  }
  for (State s : free_cells()) {
    bool has_neighbor = false;
    for (const auto& d : kOffsets) has_neighbor = has_neighbor || is_free(s.x + d[0], s.y + d[1]);
    if (!has_neighbor) throw ValidationError("free cell " + cell_str(s) + " is isolated");
  }
}

std::vector<State> Maze::free_cells() const {
  std::vector<State> out;
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x)
      if (!is_wall(x, y)) out.push_back({x, y});
  return out;
}

std::vector<State> Maze::walls() const {
  std::vector<State> out;
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x)
      if (is_wall(x, y)) out.push_back({x, y});
  return out;
}

std::string Maze::to_text() const {
  std::vector<std::uint8_t> start(wall_.size(), 0);
  for (State s : start_cells_) start[static_cast<std::size_t>(cell_index(s))] = 1;
  std::string out = std::to_string(width_) + " " + std::to_string(height_) + "\n";
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      const auto i = static_cast<std::size_t>(cell_index(x, y));
      out += wall_[i] ? '#' : (start[i] ? 'S' : '.');
    }
    out += '\n';
  }
  return out;
}

std::string Maze::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_text()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Maze parse_maze(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return true;
    }
    return false;
  };
  if (!next_line()) throw ParseError("empty maze file", 1);
  int width = 0;
  int height = 0;
  {
    std::istringstream header(line);
    std::string rest;
    if (!(header >> width >> height) || (header >> rest)) {
      throw ParseError("expected \"width height\"", line_no);
    }
    if (width <= 0 || height <= 0) throw ParseError("dimensions must be positive", line_no);
  }
  std::vector<State> walls;
  std::vector<State> starts;
  for (int y = 0; y < height; ++y) {
    if (!next_line()) throw ParseError("missing maze row " + std::to_string(y), line_no + 1);
    if (static_cast<int>(line.size()) != width) {
      throw ParseError("row has " + std::to_string(line.size()) + " cells, expected " +
                           std::to_string(width),
                       line_no);
    }
    for (int x = 0; x < width; ++x) {
      switch (line[static_cast<std::size_t>(x)]) {
        case '#': walls.push_back({x, y}); break;
        case 'S': starts.push_back({x, y}); break;
        case '.': break;
        default: throw ParseError(std::string("unexpected character '") + line[x] + "'", line_no);
      }
    }
  }
  while (next_line()) {
    if (!line.empty()) throw ParseError("trailing content after maze rows", line_no);
  }
  return Maze(width, height, std::move(walls), std::move(starts));
}

Maze load_maze(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open maze file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_maze(buf.str());
}

Maze open_maze(int width, int height, std::vector<State> start_cells) {
  if (start_cells.empty()) {
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) start_cells.push_back({x, y});
  }
  return Maze(width, height, {}, std::move(start_cells));
}

void require_valid(const Maze& maze, State s) {
  if (!maze.is_valid(s)) throw MalformedStateError("malformed state " + cell_str(s));
}

void require_valid(const Maze& maze, Goal g) {
  if (!maze.is_valid(g)) throw MalformedStateError("malformed goal " + cell_str({g.x, g.y}));
}

State step(const Maze& maze, State s, Action a) {
  require_valid(maze, s);
  const auto& d = kOffsets[static_cast<std::size_t>(action_index(a))];
  const State next{s.x + d[0], s.y + d[1]};
  return maze.is_valid(next) ? next : s;
}

std::vector<int> distances_to(const Maze& maze, State target) {
  require_valid(maze, target);
  // Moves between free neighbors are symmetric, so a forward search from the
  // target gives distances to it.
  std::vector<int> dist(static_cast<std::size_t>(maze.cell_count()), -1);
  std::deque<State> frontier{target};
  dist[static_cast<std::size_t>(maze.cell_index(target))] = 0;
  while (!frontier.empty()) {
    const State s = frontier.front();
    frontier.pop_front();
    const int d = dist[static_cast<std::size_t>(maze.cell_index(s))];
    for (Action a : kAllActions) {
      const State n = step(maze, s, a);
      auto& dn = dist[static_cast<std::size_t>(maze.cell_index(n))];
      if (dn < 0) {
        dn = d + 1;
        frontier.push_back(n);
      }
    }
  }
  return dist;
}

}  // namespace rws
