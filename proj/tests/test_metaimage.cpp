#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "helpers.hpp"
#include "trusmap/errors.hpp"
#include "trusmap/metaimage.hpp"

using namespace trusmap;
using trusmap::testing::TestRng;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("trusmap_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_SUITE_BEGIN("metaimage");

TEST_CASE("float volume round-trips bit-exactly with geometry") {
    TempDir dir;
    TestRng rng(14);
    Volume3 v = make_volume({16, 16, 16}, {0.37, 1.21, 0.9}, {4.25, -3.5, 10.125},
                            rng.rotation());
    for (float& x : v.data) x = static_cast<float>(rng.uniform(-100, 100));

    write_mha(v, dir.file("v.mha"));
    const Volume3 r = read_mha(dir.file("v.mha"));
    CHECK(r.data == v.data);  // bitwise
    CHECK(r.dims == v.dims);
    CHECK((r.spacing - v.spacing).norm() < 1e-12);
    CHECK((r.origin - v.origin).norm() < 1e-12);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(std::abs(r.direction(i, j) - v.direction(i, j)) < 1e-12);
    CHECK(r.intensity_type == IntensityType::Float32);
}

TEST_CASE("uint8 and int16 volumes round-trip") {
    TempDir dir;
    TestRng rng(15);
    Volume3 u8 = make_volume({8, 8, 8}, {1, 1, 1}, {}, Mat3::identity(), IntensityType::UInt8);
    for (float& x : u8.data) x = static_cast<float>(static_cast<int>(rng.uniform(0, 255.99)));
    write_mha(u8, dir.file("u8.mha"));
    CHECK(read_mha(dir.file("u8.mha")).data == u8.data);

    Volume3 i16 = make_volume({8, 8, 8}, {1, 1, 1}, {}, Mat3::identity(), IntensityType::Int16);
    for (float& x : i16.data)
        x = static_cast<float>(static_cast<int>(rng.uniform(-32768, 32767.99)));
    write_mha(i16, dir.file("i16.mha"));
    const Volume3 r = read_mha(dir.file("i16.mha"));
    CHECK(r.data == i16.data);
    CHECK(r.intensity_type == IntensityType::Int16);
}

TEST_CASE("file size equals header bytes plus the raw block") {
    TempDir dir;
    Volume3 v = make_volume({32, 32, 32}, {0.5, 0.5, 0.5});
    write_mha(v, dir.file("s.mha"));
    const auto total = fs::file_size(dir.file("s.mha"));
    // header ends at the newline after "ElementDataFile = LOCAL"
    std::ifstream in(dir.file("s.mha"), std::ios::binary);
    std::string line;
    std::size_t header = 0;
    while (std::getline(in, line)) {
        header += line.size() + 1;
        if (line.rfind("ElementDataFile", 0) == 0) break;
    }
    CHECK(total == header + 32 * 32 * 32 * 4);
}

TEST_CASE("missing or malformed header keys are distinct errors") {
    TempDir dir;
    auto write_header = [&](const std::string& name, const std::string& text) {
        std::ofstream out(dir.file(name), std::ios::binary);
        out << text;
        return dir.file(name);
    };

    const std::string no_spacing = write_header("a.mha",
        "ObjectType = Image\nNDims = 3\nBinaryData = True\nDimSize = 2 2 2\n"
        "Offset = 0 0 0\nElementType = MET_UCHAR\nElementDataFile = LOCAL\n\x01\x02\x03\x04\x05\x06\x07\x08");
    CHECK_THROWS_WITH_AS(read_mha(no_spacing), doctest::Contains("ElementSpacing"), IoError);

    const std::string bad_type = write_header("b.mha",
        "ObjectType = Image\nNDims = 3\nBinaryData = True\nDimSize = 2 2 2\n"
        "ElementSpacing = 1 1 1\nOffset = 0 0 0\nElementType = MET_DOUBLE\n"
        "ElementDataFile = LOCAL\n");
    CHECK_THROWS_WITH_AS(read_mha(bad_type), doctest::Contains("ElementType"), IoError);

    const std::string wrong_ndims = write_header("c.mha",
        "ObjectType = Image\nNDims = 2\nElementDataFile = LOCAL\n");
    CHECK_THROWS_WITH_AS(read_mha(wrong_ndims), doctest::Contains("NDims"), IoError);

    const std::string truncated = write_header("d.mha",
        "ObjectType = Image\nNDims = 3\nBinaryData = True\nDimSize = 4 4 4\n"
        "ElementSpacing = 1 1 1\nOffset = 0 0 0\nElementType = MET_UCHAR\n"
        "ElementDataFile = LOCAL\nxx");
    CHECK_THROWS_WITH_AS(read_mha(truncated), doctest::Contains("shorter"), IoError);

    const std::string compressed = write_header("e.mha",
        "ObjectType = Image\nNDims = 3\nBinaryData = True\nCompressedData = True\n"
        "DimSize = 2 2 2\nElementSpacing = 1 1 1\nOffset = 0 0 0\n"
        "ElementType = MET_UCHAR\nElementDataFile = LOCAL\n");
    CHECK_THROWS_WITH_AS(read_mha(compressed), doctest::Contains("compressed"), IoError);

    CHECK_THROWS_AS(read_mha(dir.file("missing.mha")), IoError);
}

TEST_CASE("mhd header with a sibling raw file") {
    TempDir dir;
    Volume3 v = make_volume({4, 4, 4}, {1, 1, 1}, {}, Mat3::identity(), IntensityType::UInt8);
    for (std::size_t i = 0; i < v.data.size(); ++i) v.data[i] = static_cast<float>(i % 251);
    {
        std::ofstream raw(dir.file("vol.raw"), std::ios::binary);
        for (float x : v.data) {
            const auto b = static_cast<unsigned char>(x);
            raw.write(reinterpret_cast<const char*>(&b), 1);
        }
        std::ofstream hdr(dir.file("vol.mhd"));
        hdr << "ObjectType = Image\nNDims = 3\nBinaryData = True\nDimSize = 4 4 4\n"
            << "ElementSpacing = 1 1 1\nOffset = 0 0 0\nElementType = MET_UCHAR\n"
            << "ElementDataFile = vol.raw\n";
    }
    const Volume3 r = read_mha(dir.file("vol.mhd"));
    CHECK(r.data == v.data);
}

TEST_CASE("default TransformMatrix is the identity") {
    TempDir dir;
    {
        std::ofstream out(dir.file("no_tm.mha"), std::ios::binary);
        out << "ObjectType = Image\nNDims = 3\nBinaryData = True\nDimSize = 2 2 2\n"
            << "ElementSpacing = 1 1 1\nOffset = 1 2 3\nElementType = MET_UCHAR\n"
            << "ElementDataFile = LOCAL\n";
        const char data[8] = {0, 1, 2, 3, 4, 5, 6, 7};
        out.write(data, 8);
    }
    const Volume3 r = read_mha(dir.file("no_tm.mha"));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(r.direction(i, j) == (i == j ? 1.0 : 0.0));
    CHECK((r.origin - Vec3{1, 2, 3}).norm() == 0.0);
}

TEST_SUITE_END();
