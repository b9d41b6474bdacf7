pub mod frozen;
pub mod gen;
pub mod oracle;
pub mod systems;
