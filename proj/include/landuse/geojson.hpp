#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "landuse/errors.hpp"
#include "landuse/geometry.hpp"
#include "landuse/serialize.hpp"

namespace landuse::io {

/// Loads zoning parcels from a GeoJSON FeatureCollection. Each Feature needs
/// a Polygon or MultiPolygon geometry and a "land_use" property holding a
/// class name (case-insensitive) or integer code 1..5. Geometry is validated
/// on load; errors name the offending feature index.
inline std::vector<ZoningPolygon> load_zoning_geojson(const std::string& path) {
    json root = load_json(path);
    if (root.value("type", "") != "FeatureCollection")
        throw InputError(path + ": expected a GeoJSON FeatureCollection");

    auto parse_ring = [](const json& jring) {
        Ring ring;
        for (const auto& pt : jring) ring.push_back(Point{pt.at(0).get<double>(), pt.at(1).get<double>()});
        return ring;
    };

    std::vector<ZoningPolygon> polygons;
    std::size_t feature_index = 0;
    for (const auto& feature : root.at("features")) {
        LandUseClass land_use;
        try {
            const auto& prop = feature.at("properties").at("land_use");
            land_use = prop.is_number_integer() ? class_from_code(prop.get<int>())
                                                : parse_land_use(prop.get<std::string>());
        } catch (const json::exception&) {
            throw InputError(path + ": feature " + std::to_string(feature_index) +
                             " missing \"land_use\" property");
        }

        const auto& geom = feature.at("geometry");
        std::string type = geom.value("type", "");
        std::vector<json> polys;
        if (type == "Polygon") {
            polys.push_back(geom.at("coordinates"));
        } else if (type == "MultiPolygon") {
            for (const auto& p : geom.at("coordinates")) polys.push_back(p);
        } else {
            throw InputError(path + ": feature " + std::to_string(feature_index) +
                             " has unsupported geometry type \"" + type + "\"");
        }
        for (const auto& jp : polys) {
            ZoningPolygon poly;
            poly.land_use = land_use;
            if (jp.empty())
                throw InputError(path + ": feature " + std::to_string(feature_index) + " has empty polygon");
            poly.exterior = parse_ring(jp.at(0));
            for (std::size_t h = 1; h < jp.size(); ++h) poly.holes.push_back(parse_ring(jp.at(h)));
            try {
                validate_polygon(poly, polygons.size());
            } catch (const InputError& e) {
                throw InputError(path + ": feature " + std::to_string(feature_index) + ": " + e.what());
            }
            polygons.push_back(std::move(poly));
        }
        ++feature_index;
    }
    return polygons;
}

}  // namespace landuse::io
