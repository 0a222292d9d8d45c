#include "tpg/io.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tpg {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

std::string read_file(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(std::string(what) + ": cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content, const char* what) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(std::string(what) + ": cannot write '" + path + "'");
    out << content;
    if (!out) fail(std::string(what) + ": write failed for '" + path + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string tok;
    std::stringstream ss(s);
    while (std::getline(ss, tok, sep)) out.push_back(tok);
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

double parse_double_or_fail(const std::string& tok, const std::string& where,
                            std::chars_format fmt = std::chars_format::general) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v, fmt);
    if (ec != std::errc() || p != tok.data() + tok.size())
        fail(where + ": not a number: '" + tok + "'");
    return v;
}

std::string format_17(double v) {
    char buf[64];
    const int n = std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(n));
}

std::string format_hex(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::hex);
    return std::string(buf, r.ptr);
}

std::string sibling_csv_path(const std::string& path) {
    const std::size_t dot = path.rfind('.');
    if (dot != std::string::npos && path.find('/', dot) == std::string::npos)
        return path.substr(0, dot) + ".csv";
    return path + ".csv";
}

}  // namespace

LoadedDataset parse_dataset_csv(const std::string& text, const std::string& name) {
    std::stringstream in(text);
    std::string line;
    if (!std::getline(in, line)) fail(name + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const std::vector<std::string> header = split(line, ',');
    if (header.size() < 2 || header.back() != "label")
        fail(name + ": header must be x1,...,label");
    for (std::size_t i = 0; i + 1 < header.size(); ++i)
        if (header[i] != "x" + std::to_string(i + 1))
            fail(name + ": header column " + std::to_string(i + 1) + " must be x" +
                 std::to_string(i + 1));
    const std::size_t dim = header.size() - 1;

    LoadedDataset out;
    std::vector<long long> originals;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> cells = split(line, ',');
        if (cells.size() != dim + 1)
            fail(name + " row " + std::to_string(row) + ": expected " + std::to_string(dim + 1) +
                 " cells, got " + std::to_string(cells.size()));
        DenseArray f({dim});
        for (std::size_t i = 0; i < dim; ++i)
            f[i] = parse_double_or_fail(cells[i], name + " row " + std::to_string(row));
        long long raw = 0;
        {
            const std::string& tok = cells[dim];
            const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), raw);
            if (ec != std::errc() || p != tok.data() + tok.size())
                fail(name + " row " + std::to_string(row) + ": label is not an integer: '" + tok +
                     "'");
        }
        int dense = -1;
        for (std::size_t i = 0; i < originals.size(); ++i)
            if (originals[i] == raw) dense = static_cast<int>(i);
        if (dense < 0) {
            dense = static_cast<int>(originals.size());
            originals.push_back(raw);
        }
        out.samples.push_back({std::move(f), dense});
    }
    if (out.samples.empty()) fail(name + ": no data rows");
    out.label_map = std::move(originals);
    return out;
}

LoadedDataset load_dataset_csv(const std::string& path) {
    return parse_dataset_csv(read_file(path, "dataset"), path);
}

void save_dataset_csv(const Dataset& data, const std::string& path) {
    if (data.empty()) fail("save_dataset_csv: empty dataset");
    const std::size_t dim = data[0].features.size();
    std::string out;
    for (std::size_t i = 0; i < dim; ++i) out += "x" + std::to_string(i + 1) + ",";
    out += "label\n";
    for (const auto& s : data) {
        if (s.features.size() != dim) fail("save_dataset_csv: ragged feature widths");
        for (std::size_t i = 0; i < dim; ++i) out += format_17(s.features[i]) + ",";
        out += std::to_string(s.label) + "\n";
    }
    write_file(path, out, "save_dataset_csv");
}

void save_checkpoint(const NamedStores& stores, const std::string& path) {
    std::string out;
    for (const auto& [store_name, store] : stores) {
        for (const auto& [param_name, value] : store.entries()) {
            out += store_name + "/" + param_name + " ";
            const auto& shape = value.shape();
            for (std::size_t i = 0; i < shape.size(); ++i) {
                if (i) out += ",";
                out += std::to_string(shape[i]);
            }
            for (std::size_t i = 0; i < value.size(); ++i) out += " " + format_hex(value[i]);
            out += "\n";
        }
    }
    write_file(path, out, "save_checkpoint");
}

NamedStores load_checkpoint(const std::string& path) {
    const std::string text = read_file(path, "checkpoint");
    NamedStores stores;
    std::stringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::string qualified, shape_tok;
        if (!(ls >> qualified >> shape_tok)) fail("checkpoint: corrupt line: '" + line + "'");
        const std::size_t slash = qualified.find('/');
        if (slash == std::string::npos)
            fail("checkpoint: array name '" + qualified + "' lacks a store prefix");
        const std::string store_name = qualified.substr(0, slash);
        const std::string param_name = qualified.substr(slash + 1);

        std::vector<std::size_t> shape;
        for (const std::string& d : split(shape_tok, ','))
            shape.push_back(static_cast<std::size_t>(
                parse_double_or_fail(d, "checkpoint array " + qualified + " shape")));
        const std::size_t expect = shape_product(shape);

        std::vector<double> values;
        values.reserve(expect);
        std::string tok;
        while (ls >> tok)
            values.push_back(
                parse_double_or_fail(tok, "checkpoint array " + qualified, std::chars_format::hex));
        if (values.size() != expect)
            fail("checkpoint array " + qualified + ": " + std::to_string(values.size()) +
                 " values for shape of " + std::to_string(expect));

        ParameterStore* store = nullptr;
        for (auto& [n, s] : stores)
            if (n == store_name) store = &s;
        if (!store) {
            stores.emplace_back(store_name, ParameterStore{});
            store = &stores.back().second;
        }
        store->add(param_name, DenseArray(shape, std::move(values)));
    }
    return stores;
}

void write_raster_ppm(const SurfaceRaster& raster, const std::string& path,
                      const std::map<int, Rgb>& palette) {
    const std::size_t n = raster.resolution;
    std::string out = "P3\n" + std::to_string(n) + " " + std::to_string(n) + "\n255\n";
    for (std::size_t i = 0; i < raster.cell_class.size(); ++i) {
        const auto it = palette.find(raster.cell_class[i]);
        if (it == palette.end())
            fail("write_raster_ppm: no palette entry for class " +
                 std::to_string(raster.cell_class[i]));
        out += std::to_string(it->second.r) + " " + std::to_string(it->second.g) + " " +
               std::to_string(it->second.b) + "\n";
    }
    write_file(path, out, "write_raster_ppm");

    std::string csv;
    for (std::size_t row = 0; row < n; ++row) {
        for (std::size_t col = 0; col < n; ++col) {
            if (col) csv += ",";
            csv += format_17(raster.cell_score[row * n + col]);
        }
        csv += "\n";
    }
    write_file(sibling_csv_path(path), csv, "write_raster_ppm");
}

}  // namespace tpg
