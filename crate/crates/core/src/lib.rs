//! Implicit shape model (ISM) trees for recognizing scenes in 6-DoF object
//! configurations and predicting poses of missing objects.
//!
//! A scene category is learned from demonstrated object trajectories. Its
//! relation topology is split into star topologies, each of which becomes a
//! single ISM; the ISMs are linked into a tree through placeholder reference
//! objects. Recognition evaluates the tree bottom-up and assembles scene
//! instances, from which poses of objects not yet observed can be predicted.
//!
//! ```
//! use ism_tree::prelude::*;
//!
//! let plate = Trajectory::new(ObjectId::named("Plate"), vec![Pose::from_translation(0.0, 0.0, 0.7); 3]);
//! let cup = Trajectory::new(ObjectId::named("Cup"), vec![Pose::from_translation(0.3, 0.0, 0.7); 3]);
//! let dataset = DemonstrationDataset::new("breakfast", vec![plate, cup]).unwrap();
//! let topology = RelationTopology::complete(dataset.objects().cloned());
//! let (stars, heights) = partition_into_stars(&topology).unwrap();
//! let tree = generate_ism_tree("breakfast", &stars, &heights, &dataset).unwrap();
//!
//! let instances = recognize_scene(&dataset.configuration_at(0), &tree, &RecognitionParams::default()).unwrap();
//! assert!((instances[0].confidence - 1.0).abs() < 1e-9);
//! ```

pub mod compliance;
pub mod error;
pub mod geometry;
pub mod io;
pub mod ism;
pub mod model;
pub mod prediction;
pub mod recognition;
pub mod selection;
pub mod topology;
pub mod tree;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::error::{Error, Result};
    pub use crate::geometry::Pose;
    pub use crate::ism::{learn_single_ism, SingleIsm};
    pub use crate::model::{DemonstrationDataset, LabeledConfiguration, ObjectId, ObjectState, Trajectory};
    pub use crate::prediction::{
        compute_shortest_paths, generate_cloud_of_pose_predictions, predict_pose, IsmPath, PredictionCloud, RandomSampler, ReplaySampler,
        VoteSampler,
    };
    pub use crate::recognition::{recognize_single_ism, RecognitionParams, RecognitionResult};
    pub use crate::selection::{select_topology, SearchParams, TopologyObjective};
    pub use crate::topology::{partition_into_stars, HeightFunction, Relation, RelationTopology, StarTopology};
    pub use crate::tree::{assemble_instances, evaluate_isms_in_tree, generate_ism_tree, recognize_scene, IsmTree, SceneInstance};
}
