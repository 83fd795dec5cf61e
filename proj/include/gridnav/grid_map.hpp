#ifndef GRIDNAV_GRID_MAP_HPP
#define GRIDNAV_GRID_MAP_HPP

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gridnav/error.hpp"
#include "gridnav/geometry.hpp"
#include "gridnav/util.hpp"

namespace gridnav {

inline constexpr double kDefaultResolution = 0.1;  // meters per cell

// Occupancy grid plus target/start annotations. Row-major storage; row 0 is
// the first grid line of the map file, col 0 its first character.
struct GridMap {
    int width = 0;   // columns
    int height = 0;  // rows
    double resolution = kDefaultResolution;
    std::vector<uint8_t> occ;        // 1 = obstacle
    std::vector<Cell> target_cells;  // row-major order
    std::vector<Cell> start_cells;   // row-major order

    bool in_bounds(const Cell& c) const {
        return c.col >= 0 && c.col < width && c.row >= 0 && c.row < height;
    }
    bool occupied(const Cell& c) const { return occ[static_cast<size_t>(c.row) * width + c.col] != 0; }
    bool free(const Cell& c) const { return in_bounds(c) && !occupied(c); }
    int index(const Cell& c) const { return c.row * width + c.col; }

    Cell cell_of(const Point& p) const {
        return Cell{static_cast<int>(std::floor(p.x / resolution)),
                    static_cast<int>(std::floor(p.y / resolution))};
    }
    Point center(const Cell& c) const {
        return Point{(c.col + 0.5) * resolution, (c.row + 0.5) * resolution};
    }
    bool contains(const Point& p) const { return in_bounds(cell_of(p)); }

    // Continuous target set G: cell centers of target cells.
    std::vector<Point> targets() const {
        std::vector<Point> g;
        g.reserve(target_cells.size());
        for (const Cell& c : target_cells) g.push_back(center(c));
        return g;
    }
};

// Obstacle-boundary set U: free cells 4-adjacent to an occupied cell or the
// map edge, returned as cell centers in row-major order.
inline std::vector<Cell> boundary_cells(const GridMap& map) {
    std::vector<Cell> out;
    static constexpr int d4[4][2] = {{-1, 0}, {0, 1}, {1, 0}, {0, -1}};  // (dr, dc)
    for (int r = 0; r < map.height; ++r) {
        for (int c = 0; c < map.width; ++c) {
            Cell cell{c, r};
            if (map.occupied(cell)) continue;
            bool boundary = false;
            for (const auto& d : d4) {
                Cell n{c + d[1], r + d[0]};
                if (!map.in_bounds(n) || map.occupied(n)) {
                    boundary = true;
                    break;
                }
            }
            if (boundary) out.push_back(cell);
        }
    }
    return out;
}

inline std::vector<Point> boundary_points(const GridMap& map) {
    std::vector<Point> out;
    for (const Cell& c : boundary_cells(map)) out.push_back(map.center(c));
    return out;
}

// Map file format:
//   resolution <meters>
//   <rows of '#' obstacle, '.' free, 'T' target, 'S' start>
// All rows must have equal length.
inline GridMap parse_map(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty map file");
    std::istringstream header(line);
    std::string key;
    double res = 0.0;
    if (!(header >> key >> res) || key != "resolution")
        throw ParseError("expected 'resolution <meters>' header, got: " + line);
    if (!(res > 0.0)) throw ValidationError("resolution must be positive");

    GridMap map;
    map.resolution = res;
    std::vector<std::string> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        rows.push_back(line);
    }
    if (rows.empty()) throw ParseError("map has no grid rows");
    map.height = static_cast<int>(rows.size());
    map.width = static_cast<int>(rows[0].size());
    map.occ.assign(static_cast<size_t>(map.width) * map.height, 0);
    for (int r = 0; r < map.height; ++r) {
        if (static_cast<int>(rows[r].size()) != map.width)
            throw ParseError("ragged row " + std::to_string(r) + ": expected width " +
                             std::to_string(map.width));
        for (int c = 0; c < map.width; ++c) {
            Cell cell{c, r};
            switch (rows[r][c]) {
                case '#': map.occ[map.index(cell)] = 1; break;
                case '.': break;
                case 'T': map.target_cells.push_back(cell); break;
                case 'S': map.start_cells.push_back(cell); break;
                default:
                    throw ParseError(std::string("unknown map character '") + rows[r][c] + "'");
            }
        }
    }

    bool any_free = false;
    for (uint8_t v : map.occ)
        if (!v) { any_free = true; break; }
    if (!any_free) throw ValidationError("map has no free cells");
    if (map.target_cells.empty()) throw ValidationError("map has no target cell");
    return map;
}

inline GridMap load_map(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open map file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_map(buf.str());
}

inline std::string serialize_map(const GridMap& map) {
    std::ostringstream out;
    out << "resolution " << format_double(map.resolution) << "\n";
    std::vector<std::string> rows(map.height, std::string(map.width, '.'));
    for (int r = 0; r < map.height; ++r)
        for (int c = 0; c < map.width; ++c)
            if (map.occupied(Cell{c, r})) rows[r][c] = '#';
    for (const Cell& t : map.target_cells) rows[t.row][t.col] = 'T';
    for (const Cell& s : map.start_cells) rows[s.row][s.col] = 'S';
    for (const auto& row : rows) out << row << "\n";
    return out.str();
}

}  // namespace gridnav

#endif
