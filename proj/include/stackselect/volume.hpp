/*
 * stackselect : motion assessment and reference stack selection
 *
 * Copyright 2026 the stackselect authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace stackselect {

enum class Orientation : std::uint8_t {
    Axial = 0,
    Coronal = 1,
    Sagittal = 2,
    Isotropic = 3,
};

enum class Axis { X = 0, Y = 1, Z = 2 };

const char* to_string(Orientation o);

/// 3D scalar raster, x-fastest layout, with millimetre voxel spacing.
/// Treated as immutable once filled; all operations return new objects.
struct Volume {
    std::array<int, 3> dims{0, 0, 0};
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    Orientation orientation = Orientation::Isotropic;
    std::vector<double> data;

    Volume() = default;
    Volume(std::array<int, 3> dims, std::array<double, 3> spacing, Orientation orientation);
    Volume(std::array<int, 3> dims, std::array<double, 3> spacing, Orientation orientation,
           std::vector<double> values);

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
    }
    std::size_t index(int x, int y, int z) const {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(dims[0]) * (static_cast<std::size_t>(y) +
                                                    static_cast<std::size_t>(dims[1]) * z);
    }
    double at(int x, int y, int z) const { return data[index(x, y, z)]; }
    bool is_isotropic() const;
};

/// Binary companion raster for a Volume with matching dims.
struct Mask {
    std::array<int, 3> dims{0, 0, 0};
    std::vector<std::uint8_t> data;

    Mask() = default;
    Mask(std::array<int, 3> dims);
    Mask(std::array<int, 3> dims, std::vector<std::uint8_t> values);

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
    }
    std::size_t index(int x, int y, int z) const {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(dims[0]) * (static_cast<std::size_t>(y) +
                                                    static_cast<std::size_t>(dims[1]) * z);
    }
    bool at(int x, int y, int z) const { return data[index(x, y, z)] != 0; }
};

/// One 2D plane extracted from a volume, row-major.
struct SliceImage {
    int width = 0;
    int height = 0;
    std::array<double, 2> spacing{1.0, 1.0};
    std::vector<double> data;
};

/// Smallest spacing component; the default isotropic target.
double default_target_spacing(const Volume& v);

/// Trilinear resample of the intensities (zero outside the grid) and
/// nearest-neighbour resample of the mask onto an isotropic grid.
/// Output dims are round(extent_mm / target_spacing), at least 1 per axis.
std::pair<Volume, Mask> resample_isotropic(const Volume& v, const Mask& m,
                                           double target_spacing);

/// One SliceImage per index along the axis; requires isotropic input.
std::vector<SliceImage> reslice(const Volume& v, Axis axis);

/// Count of mask-positive voxels in the plane at `index` along `axis`.
std::int64_t effective_area(const Mask& m, Axis axis, int index);

/// Total count of mask-positive voxels.
std::int64_t effective_volume(const Mask& m);

/// Deterministic synthetic test volume: nested ellipsoids with a smooth
/// sinusoidal texture, intensities in [0, 1000], mask = outer ellipsoid.
std::pair<Volume, Mask> make_phantom(int size, std::int64_t seed);

}  // namespace stackselect
