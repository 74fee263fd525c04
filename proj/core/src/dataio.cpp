#include "lupi/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "lupi/errors.hpp"
#include "lupi/rng.hpp"

namespace lupi {

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& path) {
    unsigned char bytes[4];
    if (!in.read(reinterpret_cast<char*>(bytes), 4))
        throw FormatError(path + ": truncated header");
    return (std::uint32_t(bytes[0]) << 24) | (std::uint32_t(bytes[1]) << 16) |
           (std::uint32_t(bytes[2]) << 8) | std::uint32_t(bytes[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
    const unsigned char bytes[4] = {static_cast<unsigned char>(v >> 24),
                                    static_cast<unsigned char>(v >> 16),
                                    static_cast<unsigned char>(v >> 8),
                                    static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

std::ifstream open_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    return in;
}

std::vector<std::uint8_t> read_payload(std::istream& in, std::size_t expected,
                                       const std::string& path) {
    std::vector<std::uint8_t> payload(expected);
    in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(expected));
    const std::size_t got = static_cast<std::size_t>(in.gcount());
    if (got != expected)
        throw FormatError(path + ": payload has " + std::to_string(got) +
                          " bytes, header declares " + std::to_string(expected));
    if (in.peek() != std::char_traits<char>::eof())
        throw FormatError(path + ": trailing bytes after declared payload");
    return payload;
}

} // namespace

std::pair<Tensor2D, Vector> load_idx(const std::string& images_path,
                                     const std::string& labels_path) {
    std::ifstream img = open_binary(images_path);
    const std::uint32_t img_magic = read_be32(img, images_path);
    if (img_magic != kIdxImageMagic)
        throw FormatError(images_path + ": image magic " + std::to_string(img_magic) +
                          ", expected " + std::to_string(kIdxImageMagic));
    const std::uint32_t count = read_be32(img, images_path);
    const std::uint32_t rows = read_be32(img, images_path);
    const std::uint32_t cols = read_be32(img, images_path);
    const std::size_t pixels_per_image = std::size_t(rows) * cols;
    const std::vector<std::uint8_t> pixels =
        read_payload(img, std::size_t(count) * pixels_per_image, images_path);

    std::ifstream lab = open_binary(labels_path);
    const std::uint32_t lab_magic = read_be32(lab, labels_path);
    if (lab_magic != kIdxLabelMagic)
        throw FormatError(labels_path + ": label magic " + std::to_string(lab_magic) +
                          ", expected " + std::to_string(kIdxLabelMagic));
    const std::uint32_t lab_count = read_be32(lab, labels_path);
    if (lab_count != count)
        throw FormatError(labels_path + ": " + std::to_string(lab_count) + " labels for " +
                          std::to_string(count) + " images");
    const std::vector<std::uint8_t> raw_labels = read_payload(lab, lab_count, labels_path);

    Tensor2D images(count, pixels_per_image);
    for (std::size_t i = 0; i < images.size(); ++i)
        images.data()[i] = static_cast<double>(pixels[i]) / 255.0;
    Vector labels(lab_count);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = raw_labels[i];
    return {std::move(images), std::move(labels)};
}

void write_idx_images(const std::string& path, const std::vector<std::uint8_t>& pixels,
                      std::size_t count, std::size_t rows, std::size_t cols) {
    if (pixels.size() != count * rows * cols)
        throw ShapeError("write_idx_images: " + std::to_string(pixels.size()) +
                         " bytes for declared " + std::to_string(count * rows * cols));
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    write_be32(out, kIdxImageMagic);
    write_be32(out, static_cast<std::uint32_t>(count));
    write_be32(out, static_cast<std::uint32_t>(rows));
    write_be32(out, static_cast<std::uint32_t>(cols));
    out.write(reinterpret_cast<const char*>(pixels.data()),
              static_cast<std::streamsize>(pixels.size()));
    if (!out) throw IoError("short write to " + path);
}

void write_idx_labels(const std::string& path, const std::vector<std::uint8_t>& labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    write_be32(out, kIdxLabelMagic);
    write_be32(out, static_cast<std::uint32_t>(labels.size()));
    out.write(reinterpret_cast<const char*>(labels.data()),
              static_cast<std::streamsize>(labels.size()));
    if (!out) throw IoError("short write to " + path);
}

Tensor2D downscale_4x4(const Tensor2D& images) {
    if (images.cols() != 28 * 28)
        throw ShapeError("downscale_4x4: rows must hold 28x28 = 784 pixels, got " +
                         std::to_string(images.cols()));
    Tensor2D out(images.rows(), 7 * 7);
    for (std::size_t i = 0; i < images.rows(); ++i) {
        const auto src = images.row(i);
        auto dst = out.row(i);
        for (std::size_t br = 0; br < 7; ++br) {
            for (std::size_t bc = 0; bc < 7; ++bc) {
                double sum = 0.0;
                for (std::size_t r = 0; r < 4; ++r)
                    for (std::size_t c = 0; c < 4; ++c)
                        sum += src[(br * 4 + r) * 28 + (bc * 4 + c)];
                dst[br * 7 + bc] = sum / 16.0;
            }
        }
    }
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
    std::size_t consumed = 0;
    double value = 0.0;
    try {
        value = std::stod(cell, &consumed);
    } catch (const std::exception&) {
        consumed = 0;
    }
    if (consumed != cell.size() || cell.empty())
        throw ParseError("row " + std::to_string(row) + ", column " + column +
                         ": cannot parse '" + cell + "' as a number");
    return value;
}

// Column indices carrying a `prefix_<k>` name, ordered by k.
std::vector<std::size_t> feature_columns(const std::vector<std::string>& header,
                                         const std::string& prefix) {
    std::map<long, std::size_t> by_suffix;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string& name = header[c];
        if (name.size() <= prefix.size() || name.compare(0, prefix.size(), prefix) != 0) continue;
        const std::string suffix = name.substr(prefix.size());
        if (suffix.empty() || suffix.find_first_not_of("0123456789") != std::string::npos)
            continue;
        const long k = std::stol(suffix);
        if (by_suffix.count(k))
            throw SchemaError("duplicate column " + name);
        by_suffix[k] = c;
    }
    std::vector<std::size_t> cols;
    cols.reserve(by_suffix.size());
    for (const auto& [k, c] : by_suffix) cols.push_back(c);
    return cols;
}

} // namespace

TabularData load_tabular(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw SchemaError(path + ": missing header row");
    const std::vector<std::string> header = split_csv_line(line);

    auto find_column = [&](const std::string& name) -> std::size_t {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (header[c] == name) return c;
        throw SchemaError(path + ": missing required column '" + name + "'");
    };
    const std::size_t group_col = find_column("group");
    const std::size_t target_col = find_column("y");
    const std::vector<std::size_t> input_cols = feature_columns(header, "x_");
    const std::vector<std::size_t> priv_cols = feature_columns(header, "p_");
    if (input_cols.empty()) throw SchemaError(path + ": no x_<k> input columns");
    if (priv_cols.empty()) throw SchemaError(path + ": no p_<k> privileged columns");

    std::vector<std::vector<std::string>> records;
    std::size_t row_number = 1;
    while (std::getline(in, line)) {
        ++row_number;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw ParseError(path + ": row " + std::to_string(row_number) + " has " +
                             std::to_string(fields.size()) + " fields, header has " +
                             std::to_string(header.size()));
        records.push_back(std::move(fields));
    }

    TabularData out;
    const std::size_t n = records.size();
    out.dataset.task = TaskKind::regression;
    out.dataset.X = Tensor2D(n, input_cols.size());
    out.dataset.X_star = Tensor2D(n, priv_cols.size());
    out.dataset.y = Tensor2D(n, 1);
    out.groups.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& rec = records[i];
        out.groups.push_back(rec[group_col]);
        const double target = parse_cell(rec[target_col], i + 2, "y");
        if (!std::isfinite(target))
            throw ParseError(path + ": row " + std::to_string(i + 2) + ": non-finite target");
        out.dataset.y(i, 0) = target;
        for (std::size_t j = 0; j < input_cols.size(); ++j)
            out.dataset.X(i, j) = parse_cell(rec[input_cols[j]], i + 2, header[input_cols[j]]);
        for (std::size_t j = 0; j < priv_cols.size(); ++j)
            out.dataset.X_star(i, j) =
                parse_cell(rec[priv_cols[j]], i + 2, header[priv_cols[j]]);
    }
    return out;
}

void write_tabular(const std::string& path, const LupiDataset& dataset,
                   const std::vector<std::string>& groups) {
    dataset.validate();
    if (groups.size() != dataset.rows())
        throw ShapeError("write_tabular: " + std::to_string(groups.size()) + " group ids for " +
                         std::to_string(dataset.rows()) + " rows");
    if (dataset.y.cols() != 1)
        throw UnsupportedModeError("write_tabular: only scalar targets fit the CSV schema");
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);

    out << "group,y";
    for (std::size_t j = 0; j < dataset.X.cols(); ++j) out << ",x_" << j;
    for (std::size_t j = 0; j < dataset.X_star.cols(); ++j) out << ",p_" << j;
    out << "\n";
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << ',' << buf;
    };
    for (std::size_t i = 0; i < dataset.rows(); ++i) {
        out << groups[i];
        put(dataset.y(i, 0));
        for (std::size_t j = 0; j < dataset.X.cols(); ++j) put(dataset.X(i, j));
        for (std::size_t j = 0; j < dataset.X_star.cols(); ++j) put(dataset.X_star(i, j));
        out << "\n";
    }
    if (!out) throw IoError("short write to " + path);
}

CvSplit loocv_splits(const std::vector<std::string>& groups) {
    std::vector<std::string> distinct;
    for (const auto& g : groups)
        if (std::find(distinct.begin(), distinct.end(), g) == distinct.end())
            distinct.push_back(g);
    if (distinct.size() < 2)
        throw ConfigError("loocv_splits: need at least 2 distinct groups, got " +
                          std::to_string(distinct.size()));

    CvSplit split;
    split.folds.reserve(distinct.size());
    for (const auto& g : distinct) {
        CvFold fold;
        for (std::size_t i = 0; i < groups.size(); ++i)
            (groups[i] == g ? fold.test_rows : fold.train_rows).push_back(i);
        split.folds.push_back(std::move(fold));
    }
    return split;
}

LupiDataset subsample(const LupiDataset& dataset, std::size_t n, std::uint64_t seed) {
    dataset.validate();
    if (n > dataset.rows())
        throw DomainError("subsample: requested " + std::to_string(n) + " of " +
                          std::to_string(dataset.rows()) + " rows");
    Rng rng(seed);
    const std::vector<std::size_t> rows = rng.sample_without_replacement(dataset.rows(), n);
    LupiDataset out;
    out.task = dataset.task;
    out.X = dataset.X.gather_rows(rows);
    out.X_star = dataset.X_star.gather_rows(rows);
    out.y = dataset.y.gather_rows(rows);
    return out;
}

} // namespace lupi
