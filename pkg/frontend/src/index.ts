export * from "./wire.js";
export * from "./client.js";
export * from "./rotation.js";
export * from "./raycast.js";
export * from "./scene.js";
