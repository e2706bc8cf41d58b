//set the state of all entities in line
//to default
For each entities in network set:
   State[i]= initial_state[i]
//Force the state of  entities
//to the wanted value
For all entities in the location defined:
   State[j]= setStateTo[j]
//Stimulate the system component with signals
For each Input in I
   stimulate Component[i] with Input[i]
//Monitor of the output and checks
For each Output in O
   check Output of O[i] equals to condition C[i]
// stimulate with SoMcommand the OBU
stimulate Train[i] whit Input[“MakeSom”]
//Monitor if SoM is  performed
check OBU send SoM Position Report to RBC
check RBC send MA to OBU
[...]
