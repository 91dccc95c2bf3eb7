/** Every fixed user-visible string lives here; dynamic text comes from the API. */

export const STRINGS = {
  appTitle: "Group Content Monitor",
  loginHeading: "Analyst sign-in",
  usernameLabel: "Username",
  passwordLabel: "Password",
  loginButton: "Sign in",
  loginFailed: "Wrong username or password",
  periodHeading: "Period",
  applyRange: "Apply range",
  invalidRange: "End date is before start date",
  tabImage: "Images",
  tabVideo: "Videos",
  tabAudio: "Audio",
  tabText: "Texts",
  sharesBadge: "shares",
  groupsLabel: "groups",
  sendersLabel: "senders",
  detailHeading: "Spread details",
  groupListHeading: "Shared in",
  reverseSearch: "Search this image on Google",
  downloadMedia: "Download file",
  closePanel: "Close",
  emptyGrid: "Nothing ranked for this period",
  sessionExpired: "Session expired, sign in again",
} as const;

export type StringKey = keyof typeof STRINGS;
