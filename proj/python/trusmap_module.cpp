// Python bindings for the trusmap core: volumes, rigid transforms,
// registration, phantom generation, sector targeting, and the statistics
// helpers. Vectors are plain (3,) float64 arrays; volumes convert to numpy
// with shape (nz, ny, nx) matching the x-fastest memory layout.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "trusmap/analytics.hpp"
#include "trusmap/biopsy.hpp"
#include "trusmap/errors.hpp"
#include "trusmap/fiducial.hpp"
#include "trusmap/metaimage.hpp"
#include "trusmap/phantom.hpp"
#include "trusmap/registration.hpp"
#include "trusmap/sector.hpp"
#include "trusmap/session_io.hpp"
#include "trusmap/similarity.hpp"
#include "trusmap/threading.hpp"
#include "trusmap/transform.hpp"
#include "trusmap/volume.hpp"

namespace py = pybind11;
using namespace trusmap;

namespace {

Vec3 to_vec3(py::handle obj) {
    const auto seq = py::cast<std::array<double, 3>>(obj);
    return {seq[0], seq[1], seq[2]};
}

py::tuple from_vec3(const Vec3& v) { return py::make_tuple(v.x, v.y, v.z); }

Mat3 to_mat3(py::handle obj) {
    const auto m = py::cast<std::array<std::array<double, 3>, 3>>(obj);
    Mat3 out{};
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) out(r, c) = m[r][c];
    return out;
}

py::array_t<double> from_mat3(const Mat3& m) {
    py::array_t<double> out({3, 3});
    auto a = out.mutable_unchecked<2>();
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) a(r, c) = m(r, c);
    return out;
}

Volume3 volume_from_numpy(py::array_t<float, py::array::c_style | py::array::forcecast> data,
                          py::handle spacing, py::handle origin, py::object direction) {
    if (data.ndim() != 3) throw InvalidArgument("volume array must be 3D (nz, ny, nx)");
    Volume3 v;
    v.dims = {static_cast<int>(data.shape(2)), static_cast<int>(data.shape(1)),
              static_cast<int>(data.shape(0))};
    v.spacing = to_vec3(spacing);
    v.origin = to_vec3(origin);
    v.direction = direction.is_none() ? Mat3::identity() : to_mat3(direction);
    v.intensity_type = IntensityType::Float32;
    v.data.assign(data.data(), data.data() + data.size());
    validate_volume(v);
    return v;
}

py::array_t<float> volume_to_numpy(const Volume3& v) {
    py::array_t<float> out({v.dims[2], v.dims[1], v.dims[0]});
    std::copy(v.data.begin(), v.data.end(), out.mutable_data());
    return out;
}

GroundTruth truth_of(const std::pair<Volume3, GroundTruth>& pair) { return pair.second; }

}  // namespace

PYBIND11_MODULE(_trusmap, m) {
    m.doc() = "3D TRUS tracking: rigid registration, biopsy mapping, targeting analytics";

    py::register_exception<InvalidArgument>(m, "InvalidArgumentError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_IOError);
    py::register_exception<GimbalLock>(m, "GimbalLockError", PyExc_ArithmeticError);
    py::register_exception<InsufficientOverlap>(m, "InsufficientOverlapError", PyExc_ValueError);
    py::register_exception<DegenerateIntensity>(m, "DegenerateIntensityError", PyExc_ValueError);

    py::class_<Volume3>(m, "Volume")
        .def_static(
            "from_numpy",
            [](py::array_t<float, py::array::c_style | py::array::forcecast> data,
               py::handle spacing, py::handle origin, py::object direction) {
                return volume_from_numpy(data, spacing, origin, direction);
            },
            py::arg("data"), py::arg("spacing"), py::arg("origin") = py::make_tuple(0.0, 0.0, 0.0),
            py::arg("direction") = py::none())
        .def("to_numpy", &volume_to_numpy)
        .def_property_readonly("dims",
                               [](const Volume3& v) {
                                   return py::make_tuple(v.dims[0], v.dims[1], v.dims[2]);
                               })
        .def_property_readonly("spacing", [](const Volume3& v) { return from_vec3(v.spacing); })
        .def_property_readonly("origin", [](const Volume3& v) { return from_vec3(v.origin); })
        .def_property_readonly("direction", [](const Volume3& v) { return from_mat3(v.direction); })
        .def("index_to_world",
             [](const Volume3& v, py::handle idx) { return from_vec3(index_to_world(v, to_vec3(idx))); })
        .def("world_to_index",
             [](const Volume3& v, py::handle p) { return from_vec3(world_to_index(v, to_vec3(p))); })
        .def("sample",
             [](const Volume3& v, py::handle p) -> std::optional<float> {
                 return sample_trilinear(v, to_vec3(p));
             })
        .def("__repr__", [](const Volume3& v) {
            return "<trusmap.Volume " + std::to_string(v.dims[0]) + "x" +
                   std::to_string(v.dims[1]) + "x" + std::to_string(v.dims[2]) + ">";
        });

    m.def("gaussian_downsample", &gaussian_downsample, py::arg("volume"), py::arg("factor"));
    m.def(
        "build_pyramid",
        [](const Volume3& v, int n_levels, int factor) { return build_pyramid(v, n_levels, factor).levels; },
        py::arg("volume"), py::arg("n_levels"), py::arg("factor") = 2);

    py::class_<RigidTransform>(m, "RigidTransform")
        .def(py::init([](py::object rotation, py::handle translation, py::handle center) {
                 RigidTransform t;
                 if (!rotation.is_none()) t.rotation = to_mat3(rotation);
                 t.translation = to_vec3(translation);
                 t.center = to_vec3(center);
                 validate_transform(t);
                 return t;
             }),
             py::arg("rotation") = py::none(),
             py::arg("translation") = py::make_tuple(0.0, 0.0, 0.0),
             py::arg("center") = py::make_tuple(0.0, 0.0, 0.0))
        .def_static(
            "from_params",
            [](py::handle t, py::handle r_zyx_rad, py::handle center) {
                TransformParams p;
                p.t = to_vec3(t);
                p.r = to_vec3(r_zyx_rad);
                return from_params(p, to_vec3(center));
            },
            py::arg("translation"), py::arg("rotation_rad"),
            py::arg("center") = py::make_tuple(0.0, 0.0, 0.0),
            "rotation_rad holds per-axis angles (rx, ry, rz); the rotation is "
            "Rz(rz)*Ry(ry)*Rx(rx) about center")
        .def("to_params",
             [](const RigidTransform& t) {
                 const TransformParams p = to_params(t);
                 return py::make_tuple(from_vec3(p.t), from_vec3(p.r));
             })
        .def_property_readonly("rotation",
                               [](const RigidTransform& t) { return from_mat3(t.rotation); })
        .def_property_readonly("translation",
                               [](const RigidTransform& t) { return from_vec3(t.translation); })
        .def_property_readonly("center", [](const RigidTransform& t) { return from_vec3(t.center); })
        .def("apply", [](const RigidTransform& t, py::handle q) {
            return from_vec3(apply_point(t, to_vec3(q)));
        })
        .def("compose", [](const RigidTransform& a, const RigidTransform& b) { return compose(a, b); })
        .def("invert", [](const RigidTransform& t) { return invert(t); })
        .def("rotation_angle_deg", &rotation_angle_deg)
        .def("to_json", &io::transform_to_json)
        .def_static("from_json", &io::transform_from_json);

    py::class_<RegistrationConfig>(m, "RegistrationConfig")
        .def(py::init<>())
        .def_readwrite("n_levels", &RegistrationConfig::n_levels)
        .def_readwrite("sampling_steps", &RegistrationConfig::sampling_steps)
        .def_readwrite("param_tolerance", &RegistrationConfig::param_tolerance)
        .def_readwrite("function_tolerance", &RegistrationConfig::function_tolerance)
        .def_readwrite("max_iterations", &RegistrationConfig::max_iterations)
        .def_readwrite("success_min_score", &RegistrationConfig::success_min_score)
        .def_readwrite("success_max_translation_mm", &RegistrationConfig::success_max_translation_mm)
        .def_readwrite("success_max_rotation_deg", &RegistrationConfig::success_max_rotation_deg)
        .def_readwrite("angle_scale", &RegistrationConfig::angle_scale);

    py::class_<RegistrationResult>(m, "RegistrationResult")
        .def_readonly("transform", &RegistrationResult::transform)
        .def_readonly("score", &RegistrationResult::score)
        .def_readonly("success", &RegistrationResult::success)
        .def_readonly("iterations", &RegistrationResult::iterations)
        .def_readonly("overlap_fraction", &RegistrationResult::overlap_fraction)
        .def_readonly("elapsed_seconds", &RegistrationResult::elapsed_seconds)
        .def("__repr__", [](const RegistrationResult& r) {
            return "<trusmap.RegistrationResult score=" + std::to_string(r.score) +
                   " success=" + (r.success ? std::string("True") : std::string("False")) + ">";
        });

    m.def(
        "register_volumes",
        [](const Volume3& ref, const Volume3& mov, std::optional<RegistrationConfig> cfg) {
            py::gil_scoped_release release;
            return register_volumes(ref, mov, cfg.value_or(RegistrationConfig{}));
        },
        py::arg("reference"), py::arg("moving"), py::arg("config") = py::none());

    m.def(
        "similarity",
        [](const Volume3& ref, const Volume3& mov, const RigidTransform& T, int step) {
            py::gil_scoped_release release;
            const SimilarityResult r = similarity(ref, mov, T, step);
            return std::make_pair(r.score, r.overlap);
        },
        py::arg("reference"), py::arg("moving"), py::arg("transform"), py::arg("step") = 2,
        "returns (pearson_score, overlap_fraction)");

    py::class_<PhantomConfig>(m, "PhantomConfig")
        .def(py::init<>())
        .def_readwrite("dims", &PhantomConfig::dims)
        .def_property(
            "spacing", [](const PhantomConfig& c) { return from_vec3(c.spacing); },
            [](PhantomConfig& c, py::handle v) { c.spacing = to_vec3(v); })
        .def_property(
            "semi_axes", [](const PhantomConfig& c) { return from_vec3(c.semi_axes); },
            [](PhantomConfig& c, py::handle v) { c.semi_axes = to_vec3(v); })
        .def_readwrite("prostate_mean", &PhantomConfig::prostate_mean)
        .def_readwrite("background_mean", &PhantomConfig::background_mean)
        .def_readwrite("speckle_sigma", &PhantomConfig::speckle_sigma)
        .def_readwrite("n_fiducials", &PhantomConfig::n_fiducials)
        .def_readwrite("fiducial_radius", &PhantomConfig::fiducial_radius)
        .def_readwrite("fiducial_intensity", &PhantomConfig::fiducial_intensity)
        .def_readwrite("seed", &PhantomConfig::seed);

    py::class_<GroundTruth>(m, "GroundTruth")
        .def_readonly("transform", &GroundTruth::transform)
        .def_property_readonly("fiducials_ref",
                               [](const GroundTruth& g) {
                                   py::list out;
                                   for (const Vec3& f : g.fiducials_ref) out.append(from_vec3(f));
                                   return out;
                               })
        .def_property_readonly("fiducials_mov", [](const GroundTruth& g) {
            py::list out;
            for (const Vec3& f : g.fiducials_mov) out.append(from_vec3(f));
            return out;
        });

    m.def(
        "generate_reference",
        [](const PhantomConfig& cfg) {
            py::gil_scoped_release release;
            return generate_reference(cfg);
        },
        py::arg("config"), "returns (volume, ground_truth)");
    m.def(
        "generate_moving",
        [](const PhantomConfig& cfg, const RigidTransform& T, std::uint64_t noise_seed) {
            py::gil_scoped_release release;
            return generate_moving(cfg, T, noise_seed);
        },
        py::arg("config"), py::arg("transform"), py::arg("noise_seed"),
        "returns (volume, ground_truth)");

    py::class_<SectorGrid>(m, "SectorGrid")
        .def_static(
            "from_box",
            [](py::handle lo, py::handle hi) { return build_grid({to_vec3(lo), to_vec3(hi)}); },
            py::arg("lo_mm"), py::arg("hi_mm"))
        .def_property_readonly("bbox",
                               [](const SectorGrid& g) {
                                   return py::make_tuple(from_vec3(g.bbox.lo), from_vec3(g.bbox.hi));
                               })
        .def_property_readonly("row_edges",
                               [](const SectorGrid& g) { return g.row_edges; })
        .def_property_readonly("col_edges", [](const SectorGrid& g) { return g.col_edges; });

    m.def(
        "clip_length",
        [](py::handle entry, py::handle tip, const SectorGrid& grid, const std::string& target) {
            const NeedleSegment seg{to_vec3(entry), to_vec3(tip), ""};
            return clip_length(seg, grid, label_from_code(target));
        },
        py::arg("entry_mm"), py::arg("tip_mm"), py::arg("grid"), py::arg("target"),
        "segment length inside the target sector; fused codes (AP-L/AP-R) sum both apex sectors");
    m.def(
        "is_hit",
        [](py::handle entry, py::handle tip, const SectorGrid& grid, const std::string& target,
           double min_len) {
            const NeedleSegment seg{to_vec3(entry), to_vec3(tip), ""};
            return is_hit(seg, grid, label_from_code(target), min_len);
        },
        py::arg("entry_mm"), py::arg("tip_mm"), py::arg("grid"), py::arg("target"),
        py::arg("min_len") = 1.0);
    m.def("fuse_apex",
          [](const std::string& code) { return to_code(fuse_apex(label_from_code(code))); });
    m.def("raw_target_codes", [] {
        py::list out;
        for (const TargetLabel& label : raw_labels()) out.append(to_code(label));
        return out;
    });

    m.def(
        "tre",
        [](py::iterable pairs, const RigidTransform& T) {
            std::vector<FiducialPair> fp;
            int i = 0;
            for (py::handle it : pairs) {
                const auto pair = py::cast<py::tuple>(it);
                fp.push_back({to_vec3(pair[0]), to_vec3(pair[1]), "f" + std::to_string(i++)});
            }
            const TreSummary s = tre(fp, T);
            return py::make_tuple(s.mean, s.max, s.n);
        },
        py::arg("pairs"), py::arg("transform"),
        "pairs of (ref_mm, mov_mm); returns (mean_mm, max_mm, n)");

    m.def("chi2_2x2", &chi2_2x2, py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"),
          py::arg("yates") = false);
    m.def("chi2_sf_df1", &chi2_sf_df1, py::arg("x"));

    m.def("read_mha", &read_mha, py::arg("path"));
    m.def("write_mha", &write_mha, py::arg("volume"), py::arg("path"));

    m.def("set_threads", &set_thread_count, py::arg("n"),
          "worker threads for registration and generation; 0 = all cores");

    m.attr("__version__") = "1.0.0";
}
