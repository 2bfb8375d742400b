pub mod hyperdual;
