export * from './schema.js';
export * from './view.js';
export * from './sessionClient.js';
export * from './syntheticDriver.js';
export * from './consent.js';
