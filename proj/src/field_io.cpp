#include "hjlab/field_io.hpp"

#include "hjlab/errors.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace hjlab {

void to_json(nlohmann::json& j, const GridSpec& spec) {
    j = nlohmann::json{{"dimension", spec.dimension}, {"half_width", spec.half_width}, {"cells", spec.cells},
                       {"t0", spec.t0},               {"t1", spec.t1},                 {"dt", spec.dt}};
}

void from_json(const nlohmann::json& j, GridSpec& spec) {
    j.at("dimension").get_to(spec.dimension);
    j.at("half_width").get_to(spec.half_width);
    j.at("cells").get_to(spec.cells);
    j.at("t0").get_to(spec.t0);
    j.at("t1").get_to(spec.t1);
    j.at("dt").get_to(spec.dt);
}

void write_field_csv(const ScalarField& f, std::ostream& out, std::optional<std::size_t> slice) {
    const GridSpec& spec = f.spec();
    out << "t";
    for (int a = 1; a <= spec.dimension; ++a) out << ",x" << a;
    out << ",u\n";
    out << std::setprecision(17);
    std::vector<double> x(static_cast<std::size_t>(spec.dimension));
    const std::size_t first = slice.value_or(0);
    const std::size_t last = slice ? *slice + 1 : spec.time_slices();
    for (std::size_t i = first; i < last; ++i) {
        const double t = spec.time(i);
        const auto s = f.slice(i);
        for (std::size_t c = 0; c < s.size(); ++c) {
            spec.cell_center(c, x);
            out << t;
            for (double xi : x) out << ',' << xi;
            out << ',' << s[c] << '\n';
        }
    }
}

ScalarField read_field_csv(const GridSpec& spec, std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InvalidArgument("read_field_csv: empty input");
    const std::size_t columns = static_cast<std::size_t>(spec.dimension) + 2;
    std::vector<double> values;
    values.reserve(spec.cells_per_slice() * spec.time_slices());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::size_t col = 0;
        double last = 0.0;
        while (std::getline(row, cell, ',')) {
            last = std::stod(cell);
            ++col;
        }
        if (col != columns) throw InvalidArgument("read_field_csv: malformed row '" + line + "'");
        values.push_back(last);
    }
    return ScalarField(spec, std::move(values));
}

SnapshotFiles write_snapshot(const ScalarField& f, const std::filesystem::path& dir, const std::string& stem,
                             std::optional<std::size_t> slice) {
    std::filesystem::create_directories(dir);
    SnapshotFiles files{dir / (stem + ".csv"), dir / (stem + ".json")};
    {
        std::ofstream csv(files.csv);
        if (!csv) throw Error("cannot write " + files.csv.string());
        write_field_csv(f, csv, slice);
    }
    nlohmann::json desc;
    desc["grid"] = f.spec();
    if (slice) {
        desc["slice"] = *slice;
        desc["time"] = f.spec().time(*slice);
    }
    std::ofstream js(files.descriptor);
    if (!js) throw Error("cannot write " + files.descriptor.string());
    js << desc.dump(2) << '\n';
    return files;
}

GridSpec read_grid_descriptor(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path.string());
    const auto j = nlohmann::json::parse(in);
    return j.at("grid").get<GridSpec>();
}

}  // namespace hjlab
