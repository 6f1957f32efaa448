#pragma once

#include <gpmi/cv.hpp>
#include <gpmi/gp.hpp>
#include <gpmi/virtual_patient.hpp>

#include <memory>
#include <string>
#include <vector>

namespace gpmi {

/// Columns vertex_id, lat_ms and optional sigma_ms (missing means 0).
Observations read_observations_csv(const std::string& path);
std::string format_observations_csv(const Observations& obs);

/// JSON with hyperparameters, standardization, merged observations, fit
/// diagnostics and the basis directory it was built on.
std::string format_model_json(const GpModel& model, const std::string& basis_dir);
void save_model(const GpModel& model, const std::string& basis_dir, const std::string& path);
/// Rebuilds a saved model. A relative basis directory is resolved against
/// the model file's directory. Throws Error(StaleCache) if the basis no
/// longer matches the recorded mesh hash or size.
GpModel load_model(const std::string& path);

/// point_id,kind,mean_ms,sd_ms with every vertex followed by every centroid.
std::string format_prediction_csv(const PosteriorField& vertices, const PosteriorField& centroids);
void save_prediction_vtk(const TriMesh& mesh, const PosteriorField& field, const std::string& path);

/// One row per face with magnitude and CV percentiles, IQR and direction.
std::string format_cv_csv(const CvSummary& cv);
void save_cv_vtk(const TriMesh& mesh, const CvSummary& cv, const std::string& path);

/// Virtual-patient files: truth.json, mesh.ply, lat.csv, element.csv, wave.csv.
struct TruthBundle
{
    TriMesh mesh;
    TruthField truth;
    SpeedParams speed;
};

void save_truth(const TruthBundle& bundle, const std::string& dir);
TruthBundle load_truth(const std::string& dir);

/// JSON report scoring a prediction file against a truth directory.
/// "lat" scores predict output at every vertex; "gradmag" scores cv output
/// against element CV at every face and wave CV at the wave sites.
std::string validation_report(const std::string& prediction_csv, const std::string& truth_dir,
                              const std::string& quantity);

} // namespace gpmi
