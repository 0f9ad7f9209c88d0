/** Debug-wire protocol constants used by the agent. */

export const HANDSHAKE = "JDWP-Handshake";
export const HEADER_LENGTH = 11;
export const REPLY_FLAG = 0x80;

export const CommandSet = {
  VirtualMachine: 1,
  EventRequest: 15,
  Event: 64,
} as const;

export const VirtualMachineCommand = {
  Version: 1,
  Dispose: 6,
  IDSizes: 7,
  Resume: 9,
} as const;

export const EventRequestCommand = {
  Set: 1,
} as const;

export const EventCommand = {
  Composite: 100,
} as const;

export const EventKind = {
  CLASS_PREPARE: 8,
  VM_START: 90,
  VM_DEATH: 99,
} as const;

export const SuspendPolicy = {
  NONE: 0,
} as const;

/** Sizes (in bytes) of the VM's opaque identifiers, from the IDSizes reply. */
export interface IdSizes {
  fieldId: number;
  methodId: number;
  objectId: number;
  referenceTypeId: number;
  frameId: number;
}

/** Conservative default until the IDSizes reply arrives. */
export const DEFAULT_ID_SIZES: IdSizes = {
  fieldId: 8,
  methodId: 8,
  objectId: 8,
  referenceTypeId: 8,
  frameId: 8,
};
