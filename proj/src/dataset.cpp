#include "rws/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rws/error.hpp"

namespace rws {

namespace {

std::string cell_str(int x, int y) {
  return "(" + std::to_string(x) + "," + std::to_string(y) + ")";
}

void validate_trajectory(const Maze& maze, const Trajectory& t, std::size_t id) {
  const std::string where = "trajectory " + std::to_string(id);
  if (t.states.size() != t.actions.size() + 1) {
    throw ValidationError(where + ": expected " + std::to_string(t.actions.size() + 1) +
                          " states, got " + std::to_string(t.states.size()));
  }
  if (!maze.is_valid(t.goal)) throw ValidationError(where + ": goal is not a free cell");
  for (State s : t.states) {
    if (!maze.is_valid(s)) throw ValidationError(where + ": state " + cell_str(s.x, s.y) + " is not a free cell");
  }
  for (std::size_t i = 0; i < t.actions.size(); ++i) {
    if (step(maze, t.states[i], t.actions[i]) != t.states[i + 1]) {
      throw ValidationError(where + ": step " + std::to_string(i) +
                            " is inconsistent with the maze dynamics");
    }
  }
  // Integer cells: a terminal state under any delta in (0, 1] is the goal cell.
  if (t.source == Source::Expert && phi(t.states.back()) != t.goal) {
    throw ValidationError(where + ": expert trajectory does not end at its goal");
  }
}

}  // namespace

std::string_view source_name(Source s) noexcept {
  return s == Source::Expert ? "expert" : "random";
}

OfflineDataset::OfflineDataset(Maze maze, std::vector<Trajectory> trajectories)
    : maze_(std::move(maze)), trajectories_(std::move(trajectories)) {
  for (std::size_t i = 0; i < trajectories_.size(); ++i) {
    const Trajectory& t = trajectories_[i];
    validate_trajectory(maze_, t, i);
    for (std::size_t k = 0; k < t.length(); ++k) flat_index_.push_back({i, k});
    for (State s : t.states) goal_pool_.push_back(phi(s));
  }
}

Transition OfflineDataset::transition(TransitionRef ref) const {
  const Trajectory& t = trajectories_.at(ref.trajectory);
  if (ref.step >= t.length()) throw ValidationError("transition step out of range");
  return {t.states[ref.step], t.actions[ref.step], t.states[ref.step + 1], ref.trajectory,
          ref.step};
}

std::size_t OfflineDataset::count(Source source) const {
  return static_cast<std::size_t>(std::count_if(
      trajectories_.begin(), trajectories_.end(),
      [source](const Trajectory& t) { return t.source == source; }));
}

std::size_t OfflineDataset::state_coverage() const {
  std::vector<bool> seen(static_cast<std::size_t>(maze_.cell_count()), false);
  for (const Trajectory& t : trajectories_)
    for (State s : t.states) seen[static_cast<std::size_t>(maze_.cell_index(s))] = true;
  return static_cast<std::size_t>(std::count(seen.begin(), seen.end(), true));
}

Trajectory generate_expert(const Maze& maze, State start, Goal goal) {
  require_valid(maze, start);
  require_valid(maze, goal);
  const State target{goal.x, goal.y};
  const std::vector<int> dist = distances_to(maze, target);
  auto dist_of = [&](State s) { return dist[static_cast<std::size_t>(maze.cell_index(s))]; };
  if (dist_of(start) < 0) {
    throw GenerationError("goal " + cell_str(goal.x, goal.y) + " is unreachable from start " +
                          cell_str(start.x, start.y));
  }
  Trajectory t;
  t.goal = goal;
  t.source = Source::Expert;
  t.states.push_back(start);
  State s = start;
  while (s != target) {
    const int d = dist_of(s);
    for (Action a : kAllActions) {
      const State n = step(maze, s, a);
      if (dist_of(n) == d - 1) {
        t.actions.push_back(a);
        t.states.push_back(n);
        s = n;
        break;
      }
    }
  }
  return t;
}

Trajectory generate_random(const Maze& maze, State start, std::size_t length, Rng& rng) {
  require_valid(maze, start);
  if (length == 0) throw GenerationError("random trajectory length must be positive");
  Trajectory t;
  t.source = Source::Random;
  t.states.reserve(length + 1);
  t.actions.reserve(length);
  t.states.push_back(start);
  State s = start;
  for (std::size_t i = 0; i < length; ++i) {
    const Action a = action_from_index(static_cast<int>(rng.uniform_index(kNumActions)));
    s = step(maze, s, a);
    t.actions.push_back(a);
    t.states.push_back(s);
  }
  t.goal = phi(t.states[rng.uniform_index(t.states.size())]);
  return t;
}

Trajectory trajectory_through(const Maze& maze, const std::vector<State>& waypoints,
                              Source source) {
  if (waypoints.empty()) throw GenerationError("trajectory needs at least one waypoint");
  for (State w : waypoints) {
    if (!maze.is_valid(w)) throw GenerationError("waypoint " + cell_str(w.x, w.y) + " is not a free cell");
  }
  Trajectory t;
  t.source = source;
  t.states.push_back(waypoints.front());
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    const State from = t.states.back();
    const State to = waypoints[i];
    if (from.x != to.x && from.y != to.y) {
      throw GenerationError("waypoints " + cell_str(from.x, from.y) + " and " +
                            cell_str(to.x, to.y) + " are not axis-aligned");
    }
    Action a = Action::Up;
    if (to.x > from.x) a = Action::Right;
    else if (to.x < from.x) a = Action::Left;
    else if (to.y < from.y) a = Action::Down;
    State s = from;
    while (s != to) {
      const State n = step(maze, s, a);
      if (n == s) throw GenerationError("segment blocked at " + cell_str(s.x, s.y));
      t.actions.push_back(a);
      t.states.push_back(n);
      s = n;
    }
  }
  t.goal = phi(t.states.back());
  return t;
}

OfflineDataset build_mixture(const Maze& maze, double expert_ratio, std::size_t n_traj, Rng& rng,
                             std::size_t random_length) {
  if (!(expert_ratio >= 0.0 && expert_ratio <= 1.0)) {
    throw GenerationError("expert ratio must lie in [0, 1]");
  }
  if (n_traj == 0) throw GenerationError("dataset needs at least one trajectory");
  const auto n_expert =
      static_cast<std::size_t>(std::llround(expert_ratio * static_cast<double>(n_traj)));
  const auto& starts = maze.start_cells();
  std::vector<Trajectory> trajectories;
  trajectories.reserve(n_traj);
  for (std::size_t i = 0; i < n_expert; ++i) {
    const State start = starts[rng.uniform_index(starts.size())];
    const std::vector<int> dist = distances_to(maze, start);
    std::vector<State> candidates;
    for (State c : maze.free_cells()) {
      if (c != start && dist[static_cast<std::size_t>(maze.cell_index(c))] > 0) candidates.push_back(c);
    }
    const State goal = candidates.empty() ? start : candidates[rng.uniform_index(candidates.size())];
    trajectories.push_back(generate_expert(maze, start, phi(goal)));
  }
  for (std::size_t i = n_expert; i < n_traj; ++i) {
    const State start = starts[rng.uniform_index(starts.size())];
    trajectories.push_back(generate_random(maze, start, random_length, rng));
  }
  return OfflineDataset(maze, std::move(trajectories));
}

OfflineDataset build_full_coverage(const Maze& maze) {
  std::vector<Trajectory> trajectories;
  for (State s : maze.free_cells()) {
    for (Action a : kAllActions) {
      const State n = step(maze, s, a);
      trajectories.push_back({{s, n}, {a}, phi(n), Source::Random});
    }
  }
  return OfflineDataset(maze, std::move(trajectories));
}

OfflineDataset build_stitching(const Maze& maze) {
  const int w = maze.width();
  const int h = maze.height();
  if (w < 7 || h < 7) throw GenerationError("stitching layout needs a maze of at least 7x7");
  const int cx = w / 2;
  const int cy = h / 2;
  std::vector<Trajectory> trajectories;
  trajectories.push_back(
      trajectory_through(maze, {{w - 1, h - 1}, {cx, h - 1}, {cx, 0}, {0, 0}}));
  trajectories.push_back(trajectory_through(maze, {{0, cy}, {w - 1, cy}}));
  trajectories.push_back(trajectory_through(maze, {{w - 1, 2}, {cx + 2, 2}}));
  return OfflineDataset(maze, std::move(trajectories));
}

std::string dataset_to_text(const OfflineDataset& dataset) {
  const Maze& maze = dataset.maze();
  std::string out = "#maze " + maze.hash() + " " + std::to_string(maze.width()) + " " +
                    std::to_string(maze.height()) + "\n";
  for (const Trajectory& t : dataset.trajectories()) {
    out += source_name(t.source);
    out += ";" + std::to_string(t.goal.x) + "," + std::to_string(t.goal.y);
    for (std::size_t i = 0; i < t.states.size(); ++i) {
      out += ";" + std::to_string(t.states[i].x) + "," + std::to_string(t.states[i].y);
      if (i < t.actions.size()) out += ";" + std::to_string(action_index(t.actions[i]));
    }
    out += "\n";
  }
  return out;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

int parse_int(const std::string& s, std::size_t line) {
  if (s.empty()) throw ParseError("empty integer field", line);
  std::size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(s, &pos);
  } catch (const std::exception&) {
    throw ParseError("invalid integer '" + s + "'", line);
  }
  if (pos != s.size()) throw ParseError("invalid integer '" + s + "'", line);
  return v;
}

std::pair<int, int> parse_pair(const std::string& s, std::size_t line) {
  const auto parts = split(s, ',');
  if (parts.size() != 2) throw ParseError("expected \"x,y\", got '" + s + "'", line);
  return {parse_int(parts[0], line), parse_int(parts[1], line)};
}

}  // namespace

OfflineDataset dataset_from_text(std::string_view text, const Maze& maze) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("missing #maze header", 1);
  ++line_no;
  {
    std::istringstream header(line);
    std::string tag;
    std::string hash;
    int w = 0;
    int h = 0;
    if (!(header >> tag >> hash >> w >> h) || tag != "#maze") {
      throw ParseError("expected \"#maze <hash> <width> <height>\"", line_no);
    }
    if (hash != maze.hash() || w != maze.width() || h != maze.height()) {
      throw ValidationError("dataset was generated for a different maze (hash " + hash + ")");
    }
  }
  std::vector<Trajectory> trajectories;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, ';');
    // source; goal; then states interleaved with actions: 2 + 2L + 1 fields.
    if (fields.size() < 3 || fields.size() % 2 == 0) {
      throw ParseError("truncated trajectory record", line_no);
    }
    Trajectory t;
    if (fields[0] == "expert") t.source = Source::Expert;
    else if (fields[0] == "random") t.source = Source::Random;
    else throw ParseError("unknown source tag '" + fields[0] + "'", line_no);
    const auto [gx, gy] = parse_pair(fields[1], line_no);
    t.goal = {gx, gy};
    for (std::size_t i = 2; i < fields.size(); ++i) {
      if (i % 2 == 0) {
        const auto [x, y] = parse_pair(fields[i], line_no);
        t.states.push_back({x, y});
      } else {
        const int a = parse_int(fields[i], line_no);
        if (a < 0 || a >= kNumActions) throw ParseError("action out of range", line_no);
        t.actions.push_back(static_cast<Action>(a));
      }
    }
    trajectories.push_back(std::move(t));
  }
  return OfflineDataset(maze, std::move(trajectories));
}

void save_dataset(const OfflineDataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write dataset file " + path);
  out << dataset_to_text(dataset);
  if (!out) throw Error("failed writing dataset file " + path);
}

OfflineDataset load_dataset(const std::string& path, const Maze& maze) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open dataset file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return dataset_from_text(buf.str(), maze);
}

std::vector<Transition> sample_transitions(const OfflineDataset& dataset, std::size_t n, Rng& rng) {
  const auto& index = dataset.flat_index();
  if (index.empty()) throw ValidationError("cannot sample transitions from an empty dataset");
  std::vector<Transition> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(dataset.transition(index[rng.uniform_index(index.size())]));
  return out;
}

std::vector<Goal> sample_goals_uniform(const OfflineDataset& dataset, std::size_t n, Rng& rng) {
  const auto& pool = dataset.goal_pool();
  if (pool.empty()) throw ValidationError("cannot sample goals from an empty goal pool");
  std::vector<Goal> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(pool[rng.uniform_index(pool.size())]);
  return out;
}

}  // namespace rws
