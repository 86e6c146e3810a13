#include "trusmap/metaimage.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include "trusmap/errors.hpp"

namespace trusmap {
namespace {

struct Header {
    int ndims = 0;
    std::array<int, 3> dims{0, 0, 0};
    Vec3 spacing;
    Vec3 offset;
    Mat3 direction = Mat3::identity();
    std::string element_type;
    std::string data_file;
    bool has_spacing = false, has_offset = false, has_dims = false, has_type = false;
    bool binary = true;
    bool msb = false;
    bool compressed = false;
};

std::string rtrim(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
        s.pop_back();
    return s;
}

bool parse_bool(const std::string& v) { return v == "True" || v == "true" || v == "1"; }

std::vector<double> parse_numbers(const std::string& v, std::size_t expect, const std::string& key,
                                  const std::string& path) {
    std::istringstream is(v);
    std::vector<double> out;
    double d;
    while (is >> d) out.push_back(d);
    if (out.size() != expect)
        throw IoError(path + ": header key " + key + " expects " + std::to_string(expect) +
                      " values, got " + std::to_string(out.size()));
    return out;
}

std::size_t element_size(IntensityType t) {
    switch (t) {
        case IntensityType::UInt8: return 1;
        case IntensityType::Int16: return 2;
        case IntensityType::Float32: return 4;
    }
    return 0;
}

}  // namespace

Volume3 read_mha(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path + ": cannot open for reading");

    Header h;
    std::string line;
    std::streampos data_start = 0;
    while (std::getline(in, line)) {
        line = rtrim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw IoError(path + ": malformed header line '" + line + "'");
        std::string key = rtrim(line.substr(0, eq));
        while (!key.empty() && key.back() == ' ') key.pop_back();
        std::string value = line.substr(eq + 1);
        while (!value.empty() && value.front() == ' ') value.erase(value.begin());

        if (key == "ObjectType") {
            if (value != "Image") throw IoError(path + ": ObjectType must be Image, got " + value);
        } else if (key == "NDims") {
            h.ndims = std::stoi(value);
            if (h.ndims != 3) throw IoError(path + ": only NDims = 3 is supported");
        } else if (key == "DimSize") {
            const auto v = parse_numbers(value, 3, key, path);
            for (int a = 0; a < 3; ++a) h.dims[a] = static_cast<int>(v[a]);
            h.has_dims = true;
        } else if (key == "ElementSpacing") {
            const auto v = parse_numbers(value, 3, key, path);
            h.spacing = {v[0], v[1], v[2]};
            h.has_spacing = true;
        } else if (key == "Offset" || key == "Origin" || key == "Position") {
            const auto v = parse_numbers(value, 3, key, path);
            h.offset = {v[0], v[1], v[2]};
            h.has_offset = true;
        } else if (key == "TransformMatrix" || key == "Orientation" || key == "Rotation") {
            const auto v = parse_numbers(value, 9, key, path);
            // File rows list each axis direction; our matrix keeps axes in columns.
            for (int axis = 0; axis < 3; ++axis)
                for (int r = 0; r < 3; ++r) h.direction(r, axis) = v[3 * axis + r];
        } else if (key == "ElementType") {
            h.element_type = value;
            h.has_type = true;
        } else if (key == "BinaryData") {
            h.binary = parse_bool(value);
        } else if (key == "BinaryDataByteOrderMSB" || key == "ElementByteOrderMSB") {
            h.msb = parse_bool(value);
        } else if (key == "CompressedData") {
            h.compressed = parse_bool(value);
        } else if (key == "ElementDataFile") {
            h.data_file = value;
            data_start = in.tellg();
            break;
        } else if (key == "ElementNumberOfChannels") {
            if (std::stoi(value) != 1)
                throw IoError(path + ": multi-channel volumes are not supported");
        } else if (key == "CenterOfRotation" || key == "AnatomicalOrientation" ||
                   key == "HeaderSize" || key == "Modality" || key == "SequenceID" ||
                   key == "ElementMin" || key == "ElementMax" || key == "Comment") {
            // recognized but unused
        } else {
            std::cerr << "read_mha: ignoring unknown header key '" << key << "' in " << path
                      << "\n";
        }
    }

    if (h.data_file.empty()) throw IoError(path + ": header has no ElementDataFile");
    if (h.ndims == 0) throw IoError(path + ": header has no NDims");
    if (!h.has_dims) throw IoError(path + ": header has no DimSize");
    if (!h.has_spacing) throw IoError(path + ": header has no ElementSpacing");
    if (!h.has_offset) throw IoError(path + ": header has no Offset");
    if (!h.has_type) throw IoError(path + ": header has no ElementType");
    if (!h.binary) throw IoError(path + ": ASCII data is not supported");
    if (h.compressed) throw IoError(path + ": compressed data is not supported");
    if (h.msb) throw IoError(path + ": big-endian data is not supported");

    IntensityType type;
    if (h.element_type == "MET_UCHAR") type = IntensityType::UInt8;
    else if (h.element_type == "MET_SHORT") type = IntensityType::Int16;
    else if (h.element_type == "MET_FLOAT") type = IntensityType::Float32;
    else throw IoError(path + ": unsupported ElementType " + h.element_type);

    Volume3 v;
    v.dims = h.dims;
    v.spacing = h.spacing;
    v.origin = h.offset;
    v.direction = h.direction;
    v.intensity_type = type;
    std::size_t n = 1;
    for (int a = 0; a < 3; ++a) {
        if (h.dims[a] < 1) throw IoError(path + ": DimSize entries must be positive");
        n *= static_cast<std::size_t>(h.dims[a]);
    }

    const std::size_t bytes = n * element_size(type);
    std::vector<char> raw(bytes);
    if (h.data_file == "LOCAL") {
        in.seekg(data_start);
        in.read(raw.data(), static_cast<std::streamsize>(bytes));
        if (static_cast<std::size_t>(in.gcount()) != bytes)
            throw IoError(path + ": data block shorter than DimSize requires");
    } else {
        const auto raw_path = std::filesystem::path(path).parent_path() / h.data_file;
        std::ifstream rin(raw_path, std::ios::binary);
        if (!rin) throw IoError(raw_path.string() + ": cannot open raw data file");
        rin.read(raw.data(), static_cast<std::streamsize>(bytes));
        if (static_cast<std::size_t>(rin.gcount()) != bytes)
            throw IoError(raw_path.string() + ": raw file shorter than DimSize requires");
    }

    v.data.resize(n);
    switch (type) {
        case IntensityType::UInt8: {
            const auto* p = reinterpret_cast<const std::uint8_t*>(raw.data());
            for (std::size_t i = 0; i < n; ++i) v.data[i] = static_cast<float>(p[i]);
            break;
        }
        case IntensityType::Int16: {
            const auto* p = reinterpret_cast<const std::int16_t*>(raw.data());
            for (std::size_t i = 0; i < n; ++i) v.data[i] = static_cast<float>(p[i]);
            break;
        }
        case IntensityType::Float32: {
            std::memcpy(v.data.data(), raw.data(), bytes);
            break;
        }
    }

    validate_volume(v);
    return v;
}

void write_mha(const Volume3& v, const std::string& path) {
    validate_volume(v);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path + ": cannot open for writing");

    const char* type_name = nullptr;
    switch (v.intensity_type) {
        case IntensityType::UInt8: type_name = "MET_UCHAR"; break;
        case IntensityType::Int16: type_name = "MET_SHORT"; break;
        case IntensityType::Float32: type_name = "MET_FLOAT"; break;
    }

    char buf[64];
    auto num = [&buf](double d) {
        std::snprintf(buf, sizeof buf, "%.17g", d);
        return std::string(buf);
    };

    out << "ObjectType = Image\n"
        << "NDims = 3\n"
        << "BinaryData = True\n"
        << "BinaryDataByteOrderMSB = False\n"
        << "CompressedData = False\n";
    out << "TransformMatrix =";
    for (int axis = 0; axis < 3; ++axis)
        for (int r = 0; r < 3; ++r) out << ' ' << num(v.direction(r, axis));
    out << "\n";
    out << "Offset = " << num(v.origin.x) << ' ' << num(v.origin.y) << ' ' << num(v.origin.z)
        << "\n";
    out << "ElementSpacing = " << num(v.spacing.x) << ' ' << num(v.spacing.y) << ' '
        << num(v.spacing.z) << "\n";
    out << "DimSize = " << v.dims[0] << ' ' << v.dims[1] << ' ' << v.dims[2] << "\n";
    out << "ElementType = " << type_name << "\n";
    out << "ElementDataFile = LOCAL\n";

    const std::size_t n = v.voxel_count();
    switch (v.intensity_type) {
        case IntensityType::UInt8: {
            std::vector<std::uint8_t> raw(n);
            for (std::size_t i = 0; i < n; ++i)
                raw[i] = static_cast<std::uint8_t>(std::lrint(std::fmin(255.0, std::fmax(0.0, v.data[i]))));
            out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(n));
            break;
        }
        case IntensityType::Int16: {
            std::vector<std::int16_t> raw(n);
            for (std::size_t i = 0; i < n; ++i)
                raw[i] = static_cast<std::int16_t>(
                    std::lrint(std::fmin(32767.0, std::fmax(-32768.0, v.data[i]))));
            out.write(reinterpret_cast<const char*>(raw.data()),
                      static_cast<std::streamsize>(n * 2));
            break;
        }
        case IntensityType::Float32: {
            out.write(reinterpret_cast<const char*>(v.data.data()),
                      static_cast<std::streamsize>(n * 4));
            break;
        }
    }
    if (!out) throw IoError(path + ": write failed");
}

}  // namespace trusmap
